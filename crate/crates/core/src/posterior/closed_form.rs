use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, pairwise_sum};

use super::tabulated::{GridSpec, TabulatedPosterior, Variable};

/// Nodes used to integrate over a log-uniform rank prior.
pub const RANK_PRIOR_NODES: usize = 256;

/// Uncertainty in the observed rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankPrior {
    Exact { r: f64 },
    /// Density `∝ 1/r` on `[r_lo, r_hi]`.
    LogUniform { r_lo: f64, r_hi: f64 },
}

impl RankPrior {
    pub fn exact(r: f64) -> Result<Self> {
        let p = RankPrior::Exact { r };
        p.validate()?;
        Ok(p)
    }

    pub fn log_uniform(r_lo: f64, r_hi: f64) -> Result<Self> {
        let p = RankPrior::LogUniform { r_lo, r_hi };
        p.validate()?;
        Ok(p)
    }

    /// Log-uniform between `r0 / factor` and `r0 · factor`.
    pub fn around(r0: f64, factor: f64) -> Result<Self> {
        if !(factor > 1.0) {
            return Err(Error::InvalidParameter(format!("spread factor must exceed 1, got {factor}")));
        }
        RankPrior::log_uniform(r0 / factor, r0 * factor)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RankPrior::Exact { r } if r.is_finite() && r >= 1.0 => Ok(()),
            RankPrior::Exact { r } => Err(Error::InvalidParameter(format!("rank must be >= 1, got {r}"))),
            RankPrior::LogUniform { r_lo, r_hi } if r_lo > 0.0 && r_hi.is_finite() && r_lo < r_hi => Ok(()),
            RankPrior::LogUniform { r_lo, r_hi } => Err(Error::InvalidParameter(format!(
                "log-uniform rank bounds must satisfy 0 < lo < hi, got [{r_lo}, {r_hi}]"
            ))),
        }
    }

    /// Density in `r` (zero outside the bounds; the exact prior has none).
    pub fn density(&self, r: f64) -> Option<f64> {
        match *self {
            RankPrior::Exact { .. } => None,
            RankPrior::LogUniform { r_lo, r_hi } => Some(if (r_lo..=r_hi).contains(&r) {
                1.0 / (r * (r_hi / r_lo).ln())
            } else {
                0.0
            }),
        }
    }

    /// Quadrature nodes `(r_i, w_i)` with `Σ w_i = 1`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        match *self {
            RankPrior::Exact { r } => vec![(r, 1.0)],
            RankPrior::LogUniform { r_lo, r_hi } => {
                let span = (r_hi / r_lo).ln();
                let (t, w) = gauss_legendre_on(RANK_PRIOR_NODES, r_lo.ln(), r_hi.ln());
                t.iter().zip(&w).map(|(ti, wi)| (ti.exp(), wi / span)).collect()
            }
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            RankPrior::Exact { r } => (r, r),
            RankPrior::LogUniform { r_lo, r_hi } => (r_lo, r_hi),
        }
    }
}

/// The prior-independent Pareto posterior `p(N | r) = r½ / N²` on
/// `N ≥ r½ = r - ½`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoRankPosterior {
    r_half: f64,
}

impl ParetoRankPosterior {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::InvalidParameter(format!("rank must be >= 1, got {r}")));
        }
        Ok(ParetoRankPosterior { r_half: r - 0.5 })
    }

    /// Lower edge of the support, `r - ½`.
    pub fn r_half(&self) -> f64 {
        self.r_half
    }

    pub fn density(&self, n: f64) -> f64 {
        if n < self.r_half {
            0.0
        } else {
            self.r_half / (n * n)
        }
    }

    pub fn cdf(&self, n: f64) -> f64 {
        if n <= self.r_half {
            0.0
        } else {
            1.0 - self.r_half / n
        }
    }

    /// `r½ / (1 - q)`; also the `q`-credible upper bound on `N`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("quantile level {q} outside [0, 1]")));
        }
        Ok(self.r_half / (1.0 - q))
    }

    /// `2r - 1`.
    pub fn median(&self) -> f64 {
        2.0 * self.r_half
    }

    pub fn tabulate(&self, grid: &GridSpec) -> Result<TabulatedPosterior> {
        grid.validate()?;
        let nodes = grid.above(self.r_half);
        let density = nodes.iter().map(|&n| self.density(n)).collect();
        let cdf = nodes.iter().map(|&n| self.cdf(n)).collect();
        let tail = self.r_half / nodes[nodes.len() - 1];
        TabulatedPosterior::from_parts(Variable::GroupSize, nodes, density, cdf, tail, 2.0)
    }
}

/// Tabulated `r½ / N²` posterior for an exactly known rank.
pub fn pareto_closed_form(r: f64, grid: &GridSpec) -> Result<TabulatedPosterior> {
    ParetoRankPosterior::new(r)?.tabulate(grid)
}

/// Posterior over future births `B = N - r`: `r / (B + r)²` for an exact
/// rank, mixed over the rank prior otherwise.
pub fn future_count_posterior(rank: &RankPrior, grid: &GridSpec) -> Result<TabulatedPosterior> {
    rank.validate()?;
    grid.validate()?;
    let (lo, hi) = rank.bounds();
    let nodes = rank.nodes();
    let b = grid.around(lo, hi);
    let mix = |f: &dyn Fn(f64) -> f64| -> f64 {
        let terms: Vec<f64> = nodes.iter().map(|&(r, w)| w * f(r)).collect();
        pairwise_sum(&terms)
    };
    let density = b
        .iter()
        .map(|&x| mix(&|r| r / ((x + r) * (x + r))))
        .collect();
    let cdf = b.iter().map(|&x| mix(&|r| x / (x + r))).collect();
    let top = b[b.len() - 1];
    let tail = mix(&|r| r / (top + r));
    TabulatedPosterior::from_parts(Variable::FutureCount, b, density, cdf, tail, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let p = ParetoRankPosterior::new(1.0).unwrap();
        assert_eq!(p.r_half(), 0.5);
        assert_eq!(p.density(0.49), 0.0);
        assert_eq!(p.density(1.0), 0.5);
        assert_eq!(p.median(), 1.0);
        let p = ParetoRankPosterior::new(1e11).unwrap();
        assert_eq!(p.median(), 2e11 - 1.0);
        let p = ParetoRankPosterior::new(37.0).unwrap();
        assert!((p.cdf(10.0 * p.r_half()) - 0.9).abs() < 1e-15);
        assert!(ParetoRankPosterior::new(0.5).is_err());
    }

    #[test]
    fn tabulated_closed_form_normalizes() {
        for r in [1.0, 10.0, 1e3, 1e11] {
            let t = pareto_closed_form(r, &GridSpec::default()).unwrap();
            assert!((t.normalization() - 1.0).abs() < 1e-6, "r = {r}");
            assert!(t.cdf_consistency() < 1e-6, "r = {r}");
            assert_eq!(t.grid()[0], r - 0.5);
            assert_eq!(t.median(), 2.0 * r - 1.0);
        }
    }

    #[test]
    fn exact_rank_future_count() {
        let r = 100.0;
        let t = future_count_posterior(&RankPrior::exact(r).unwrap(), &GridSpec::default()).unwrap();
        assert_eq!(t.grid()[0], 0.0);
        assert!((t.density()[0] - 1.0 / r).abs() < 1e-18);
        assert!((t.cdf_at(r) - 0.5).abs() < 1e-12);
        assert!((t.median() - r).abs() < 1e-9 * r);
        assert!((t.normalization() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn log_uniform_density_at_zero() {
        let r0 = 1e11;
        let prior = RankPrior::around(r0, 3.0).unwrap();
        let t = future_count_posterior(&prior, &GridSpec::default()).unwrap();
        let expected = (8.0 / 3.0) / (r0 * 9f64.ln());
        assert!((t.density()[0] - expected).abs() < 1e-12 * expected);
        assert!((t.density()[0] * r0 - 1.2137).abs() < 1e-4);
    }

    #[test]
    fn rank_prior_validation() {
        assert!(RankPrior::exact(0.0).is_err());
        assert!(RankPrior::log_uniform(3.0, 1.0).is_err());
        assert!(RankPrior::around(10.0, 1.0).is_err());
        let p = RankPrior::log_uniform(1.0, 9.0).unwrap();
        let total: f64 = p.nodes().iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert_eq!(p.density(10.0), Some(0.0));
        assert!((p.density(3.0).unwrap() - 1.0 / (3.0 * 9f64.ln())).abs() < 1e-15);
    }
}
