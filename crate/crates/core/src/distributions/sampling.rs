use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DistributionSpec, Lognormal};

fn draw_lognormal<R: Rng + ?Sized>(l: &Lognormal, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (l.mu_log + l.sigma * z).exp()
}

pub(super) fn draw<R: Rng + ?Sized>(spec: &DistributionSpec, rng: &mut R) -> f64 {
    match spec {
        DistributionSpec::Pareto(p) => {
            // u in (0, 1]
            let u = 1.0 - rng.random::<f64>();
            p.n_min * u.powf(-1.0 / p.alpha)
        }
        DistributionSpec::Lognormal(l) => draw_lognormal(l, rng),
        DistributionSpec::BimodalLognormal(b) => {
            if rng.random::<f64>() < b.weight {
                draw_lognormal(&b.first, rng)
            } else {
                draw_lognormal(&b.second, rng)
            }
        }
    }
}

pub(super) fn sample(spec: &DistributionSpec, seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| draw(spec, &mut rng)).collect()
}

/// Kolmogorov-Smirnov statistic `sup |F_n - F|` of `samples` against `cdf`.
/// Sorts `samples` in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i as f64 + 1.0) / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the one-sample KS statistic at the given
/// significance level: `sqrt(-ln(significance / 2) / 2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, significance: f64) -> f64 {
    (-(significance / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let s = DistributionSpec::pareto(2.0, 1.0).unwrap();
        assert_eq!(s.sample(7, 100), s.sample(7, 100));
        assert_ne!(s.sample(7, 100), s.sample(8, 100));
    }

    #[test]
    fn single_pareto_draw_respects_support() {
        let s = DistributionSpec::pareto(1.5, 4000.0).unwrap();
        let v = s.sample(1, 1);
        assert_eq!(v.len(), 1);
        assert!(v[0] >= 4000.0);
    }

    #[test]
    fn pareto_empirical_median() {
        let s = DistributionSpec::pareto(2.0, 1.0).unwrap();
        let mut v = s.sample(20161, 1_000_000);
        v.sort_by(f64::total_cmp);
        let med = v[v.len() / 2];
        assert!((1.405..=1.425).contains(&med), "median {med}");
    }

    #[test]
    fn ks_critical_value_at_one_per_mille() {
        let c = ks_critical_value(1, 1e-3);
        assert!((c - 1.9495).abs() < 1e-3);
    }

    #[test]
    fn ks_detects_wrong_distribution() {
        let s = DistributionSpec::pareto(2.0, 1.0).unwrap();
        let other = DistributionSpec::pareto(2.5, 1.0).unwrap();
        let mut v = s.sample(3, 20_000);
        let d = ks_statistic(&mut v, |x| other.cdf(x));
        assert!(d > ks_critical_value(v.len(), 1e-3));
    }
}
