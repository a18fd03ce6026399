//! Finite urn ensembles.
//!
//! Every urn holds `N_i` balls labelled `1..=N_i`. All balls are poured into
//! one super-urn and a single ball is drawn; it carries the label `r`. The
//! probability of that label under an ensemble is `m_r / N_U`, where `m_r`
//! counts urns holding at least `r` balls and `N_U` is the total number of
//! balls. Likelihoods and posteriors here are exact rationals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Ball counts of each urn in an ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrnEnsemble {
    counts: Vec<u64>,
    total: u64,
}

impl UrnEnsemble {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::InvalidParameter("total ball count overflows u64".into()))?;
        if counts.is_empty() || total == 0 {
            return Err(Error::EmptyEnsemble);
        }
        Ok(UrnEnsemble { counts, total })
    }

    /// `urns` urns sharing `total` balls as evenly as possible.
    pub fn uniform(total: u64, urns: u64) -> Result<Self> {
        if urns == 0 || urns > total {
            return Err(Error::InvalidParameter(format!(
                "cannot split {total} balls into {urns} non-empty urns"
            )));
        }
        let base = total / urns;
        let extra = total % urns;
        let counts = (0..urns).map(|i| if i < extra { base + 1 } else { base }).collect();
        UrnEnsemble::new(counts)
    }

    /// Parse the one-urn-per-line text format. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut counts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let c = line.parse::<u64>().map_err(|e| Error::Parse {
                line: i as u64 + 1,
                message: format!("invalid ball count {line:?}: {e}"),
            })?;
            counts.push(c);
        }
        UrnEnsemble::new(counts)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        UrnEnsemble::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.counts.len() * 4);
        for c in &self.counts {
            let _ = writeln!(out, "{c}");
        }
        out
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `N_U`, the total number of balls.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of urns holding at least `r` balls, i.e. balls labelled `r`.
    pub fn balls_labelled(&self, r: RankObservation) -> u64 {
        self.counts.iter().filter(|&&c| c >= r.0).count() as u64
    }

    /// Probability that a uniformly drawn ball is labelled `r`.
    pub fn rank_likelihood(&self, r: RankObservation) -> BigRational {
        BigRational::new(self.balls_labelled(r).into(), self.total.into())
    }

    /// Duplicate every urn `k` times.
    pub fn replicate(&self, k: usize) -> Result<Self> {
        let counts = self
            .counts
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, k))
            .collect();
        UrnEnsemble::new(counts)
    }
}

/// The label found on the drawn ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankObservation(u64);

impl RankObservation {
    pub fn new(r: u64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        Ok(RankObservation(r))
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}

/// Free-function form of [`UrnEnsemble::rank_likelihood`].
pub fn rank_likelihood(ensemble: &UrnEnsemble, r: RankObservation) -> BigRational {
    ensemble.rank_likelihood(r)
}

/// A candidate ensemble with its (unnormalized) prior weight.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCandidate {
    pub ensemble: UrnEnsemble,
    prior_weight: BigRational,
}

impl EnsembleCandidate {
    /// Prior weight given as a float; converted exactly.
    pub fn new(ensemble: UrnEnsemble, prior_weight: f64) -> Result<Self> {
        if !(prior_weight.is_finite() && prior_weight >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "prior weight must be finite and nonnegative, got {prior_weight}"
            )));
        }
        let prior_weight = BigRational::from_float(prior_weight).expect("finite float");
        Ok(EnsembleCandidate {
            ensemble,
            prior_weight,
        })
    }

    pub fn equal_weight(ensemble: UrnEnsemble) -> Self {
        EnsembleCandidate {
            ensemble,
            prior_weight: BigRational::from_integer(1.into()),
        }
    }

    pub fn prior_weight(&self) -> &BigRational {
        &self.prior_weight
    }
}

fn check_candidates(candidates: &[EnsembleCandidate]) -> Result<BigRational> {
    if candidates.is_empty() {
        return Err(Error::Precondition("at least one candidate is required".into()));
    }
    let total: BigRational = candidates.iter().map(|c| c.prior_weight.clone()).sum();
    if total.is_zero() {
        return Err(Error::InvalidParameter("prior weights sum to zero".into()));
    }
    Ok(total)
}

/// Posterior weight of each candidate after observing rank `r`.
///
/// Candidates that cannot produce the label get exactly zero.
pub fn candidate_posterior(candidates: &[EnsembleCandidate], r: RankObservation) -> Result<Vec<BigRational>> {
    check_candidates(candidates)?;
    let joint: Vec<BigRational> = candidates
        .iter()
        .map(|c| &c.prior_weight * c.ensemble.rank_likelihood(r))
        .collect();
    let evidence: BigRational = joint.iter().cloned().sum();
    if evidence.is_zero() {
        return Err(Error::ImpossibleObservation { rank: r.0 });
    }
    Ok(joint.into_iter().map(|j| j / &evidence).collect())
}

/// Posterior over the population of the urn the drawn ball came from.
pub fn source_urn_posterior(
    candidates: &[EnsembleCandidate],
    r: RankObservation,
) -> Result<BTreeMap<u64, BigRational>> {
    let prior_total = check_candidates(candidates)?;
    let mut mass: BTreeMap<u64, BigRational> = BTreeMap::new();
    for c in candidates {
        if c.prior_weight.is_zero() {
            continue;
        }
        let mut urns_by_size: BTreeMap<u64, u64> = BTreeMap::new();
        for &n in c.ensemble.counts.iter().filter(|&&n| n >= r.0) {
            *urns_by_size.entry(n).or_default() += 1;
        }
        let scale = &c.prior_weight / &prior_total / BigRational::from_integer(c.ensemble.total.into());
        for (n, urns) in urns_by_size {
            let add = &scale * BigRational::from_integer(urns.into());
            *mass.entry(n).or_insert_with(BigRational::zero) += add;
        }
    }
    let evidence: BigRational = mass.values().cloned().sum();
    if evidence.is_zero() {
        return Err(Error::ImpossibleObservation { rank: r.0 });
    }
    for v in mass.values_mut() {
        *v /= &evidence;
    }
    Ok(mass)
}

/// One row of a uniform-ensemble likelihood scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    /// Requested mean urn size.
    pub mean_size: u64,
    /// Number of urns the total was split into.
    pub urns: u64,
    pub likelihood: BigRational,
    /// Likelihood divided by the largest likelihood in the scan.
    pub relative: BigRational,
}

/// Likelihood of rank `r` as the mean urn size varies with the total fixed.
///
/// Each mean `μ` splits `total` balls into `k = round(total / μ)` (at least
/// one) urns as evenly as possible.
pub fn uniform_ensemble_scan(total: u64, r: RankObservation, mean_sizes: &[u64]) -> Result<Vec<ScanPoint>> {
    if total == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let mut points = Vec::with_capacity(mean_sizes.len());
    for &mu in mean_sizes {
        if mu == 0 {
            return Err(Error::InvalidParameter("mean urn size must be positive".into()));
        }
        let urns = ((total as f64 / mu as f64).round() as u64).clamp(1, total);
        // even split: `extra` urns of base + 1, the rest of base
        let base = total / urns;
        let extra = total % urns;
        let m = if base + 1 >= r.0 { extra } else { 0 } + if base >= r.0 { urns - extra } else { 0 };
        points.push(ScanPoint {
            mean_size: mu,
            urns,
            likelihood: BigRational::new(m.into(), total.into()),
            relative: BigRational::zero(),
        });
    }
    let best = points
        .iter()
        .map(|p| p.likelihood.clone())
        .max()
        .unwrap_or_else(BigRational::zero);
    if !best.is_zero() {
        for p in &mut points {
            p.relative = &p.likelihood / &best;
        }
    }
    Ok(points)
}

/// Compare source-urn posteriors, expressed over `N / r`, for uniform
/// ensembles of the same shape at different totals. Every total must be at
/// least `100 r`. Candidate mean sizes are `multiplier · r`, equally weighted.
/// Returns the largest absolute difference in posterior mass against the
/// first total.
pub fn nu_insensitivity_check(totals: &[u64], r: RankObservation, multipliers: &[u64]) -> Result<f64> {
    if totals.is_empty() || multipliers.is_empty() {
        return Err(Error::Precondition("need at least one total and one mean size".into()));
    }
    if let Some(&t) = totals.iter().find(|&&t| t < 100 * r.0) {
        return Err(Error::Precondition(format!(
            "total {t} is not much larger than rank {} (need at least 100 r)",
            r.0
        )));
    }
    let rank = BigRational::from_integer(r.0.into());
    let posterior_over_ratio = |total: u64| -> Result<BTreeMap<BigRational, BigRational>> {
        let candidates = multipliers
            .iter()
            .map(|&m| {
                let mu = m * r.0;
                let urns = ((total as f64 / mu as f64).round() as u64).clamp(1, total);
                UrnEnsemble::uniform(total, urns).map(EnsembleCandidate::equal_weight)
            })
            .collect::<Result<Vec<_>>>()?;
        let post = source_urn_posterior(&candidates, r)?;
        Ok(post
            .into_iter()
            .map(|(n, p)| (BigRational::from_integer(n.into()) / &rank, p))
            .collect())
    };
    let reference = posterior_over_ratio(totals[0])?;
    let mut worst = 0.0f64;
    for &t in &totals[1..] {
        let other = posterior_over_ratio(t)?;
        let keys: std::collections::BTreeSet<&BigRational> = reference.keys().chain(other.keys()).collect();
        for k in keys {
            let a = reference.get(k).cloned().unwrap_or_else(BigRational::zero);
            let b = other.get(k).cloned().unwrap_or_else(BigRational::zero);
            let d = (a - b).to_f64().unwrap_or(f64::INFINITY).abs();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Trials per independent random stream in [`monte_carlo_oracle`].
pub const MC_CHUNK: u64 = 1 << 16;

/// Result of simulating the draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonteCarloPosterior {
    pub trials: u64,
    /// Accepted trials (drawn label equal to `r`) per candidate.
    pub accepted: Vec<u64>,
}

impl MonteCarloPosterior {
    pub fn total_accepted(&self) -> u64 {
        self.accepted.iter().sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total_accepted() as f64;
        self.accepted.iter().map(|&a| a as f64 / n).collect()
    }
}

/// Simulate: choose a candidate by prior weight, draw one ball uniformly
/// from all of its balls, keep the trial if the label equals `r`.
///
/// Trials are split into chunks of [`MC_CHUNK`]; chunk `c` draws from
/// `ChaCha8Rng::seed_from_u64(seed)` on stream `c`. Chunks run in parallel
/// and their integer tallies are summed, so the result depends on the seed
/// and trial count only, never on the number of worker threads.
pub fn monte_carlo_oracle(
    candidates: &[EnsembleCandidate],
    r: RankObservation,
    seed: u64,
    trials: u64,
) -> Result<MonteCarloPosterior> {
    check_candidates(candidates)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let weights: Vec<f64> = candidates
        .iter()
        .map(|c| c.prior_weight.to_f64().unwrap_or(0.0))
        .collect();
    let chooser = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidParameter(format!("prior weights: {e}")))?;
    let cumulative: Vec<Vec<u64>> = candidates
        .iter()
        .map(|c| {
            c.ensemble
                .counts
                .iter()
                .scan(0u64, |acc, &n| {
                    *acc += n;
                    Some(*acc)
                })
                .collect()
        })
        .collect();

    let chunks = trials.div_ceil(MC_CHUNK);
    let accepted = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = MC_CHUNK.min(trials - chunk * MC_CHUNK);
            let mut tally = vec![0u64; candidates.len()];
            for _ in 0..n {
                let k = chooser.sample(&mut rng);
                let cum = &cumulative[k];
                let ball = rng.random_range(0..candidates[k].ensemble.total);
                let urn = cum.partition_point(|&c| c <= ball);
                let start = if urn == 0 { 0 } else { cum[urn - 1] };
                if ball - start + 1 == r.0 {
                    tally[k] += 1;
                }
            }
            tally
        })
        .reduce(
            || vec![0u64; candidates.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    if accepted.iter().all(|&a| a == 0) {
        return Err(Error::InsufficientSamples { rank: r.0, trials });
    }
    Ok(MonteCarloPosterior { trials, accepted })
}

/// Exact rational from an integer pair, for fixtures and tests.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank(r: u64) -> RankObservation {
        RankObservation::new(r).unwrap()
    }

    fn figure_two() -> Vec<EnsembleCandidate> {
        [
            vec![2u64; 10],
            vec![3, 3, 3, 3, 3, 1, 1, 1, 1, 1],
            vec![11, 1, 1, 1, 1, 1, 1, 1, 1, 1],
        ]
        .into_iter()
        .map(|c| EnsembleCandidate::equal_weight(UrnEnsemble::new(c).unwrap()))
        .collect()
    }

    #[test]
    fn likelihood_examples() {
        let c = figure_two();
        assert!(c[0].ensemble.rank_likelihood(rank(3)).is_zero());
        assert_eq!(c[1].ensemble.rank_likelihood(rank(3)), ratio(5, 20));
        assert_eq!(c[2].ensemble.rank_likelihood(rank(3)), ratio(1, 20));
    }

    #[test]
    fn empty_ensembles_rejected() {
        assert_eq!(UrnEnsemble::new(vec![]), Err(Error::EmptyEnsemble));
        assert_eq!(UrnEnsemble::new(vec![0, 0]), Err(Error::EmptyEnsemble));
        assert!(RankObservation::new(0).is_err());
    }

    #[test]
    fn five_to_one_odds() {
        let post = candidate_posterior(&figure_two(), rank(3)).unwrap();
        assert_eq!(post, vec![ratio(0, 1), ratio(5, 6), ratio(1, 6)]);
    }

    #[test]
    fn single_and_identical_candidates() {
        let one = &figure_two()[1..2];
        assert_eq!(candidate_posterior(one, rank(3)).unwrap(), vec![ratio(1, 1)]);
        let e = UrnEnsemble::new(vec![4, 7, 9]).unwrap();
        let c = vec![
            EnsembleCandidate::new(e.clone(), 0.25).unwrap(),
            EnsembleCandidate::new(e.clone(), 0.5).unwrap(),
            EnsembleCandidate::new(e, 0.25).unwrap(),
        ];
        let post = candidate_posterior(&c, rank(2)).unwrap();
        assert_eq!(post, vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]);
    }

    #[test]
    fn impossible_observation() {
        assert_eq!(
            candidate_posterior(&figure_two(), rank(25)),
            Err(Error::ImpossibleObservation { rank: 25 })
        );
        assert_eq!(
            source_urn_posterior(&figure_two(), rank(12)),
            Err(Error::ImpossibleObservation { rank: 12 })
        );
    }

    #[test]
    fn source_urn_posterior_examples() {
        let post = source_urn_posterior(&figure_two(), rank(3)).unwrap();
        let expected: BTreeMap<u64, BigRational> = [(3, ratio(5, 6)), (11, ratio(1, 6))].into();
        assert_eq!(post, expected);

        let same = vec![EnsembleCandidate::equal_weight(UrnEnsemble::new(vec![7; 5]).unwrap())];
        for r in 1..=7 {
            let post = source_urn_posterior(&same, rank(r)).unwrap();
            assert_eq!(post.len(), 1);
            assert_eq!(post[&7], ratio(1, 1));
        }
    }

    #[test]
    fn scan_examples() {
        let scan = uniform_ensemble_scan(1_000_000, rank(20), &[10, 20, 200, 1_000_000]).unwrap();
        assert!(scan[0].likelihood.is_zero());
        assert_eq!(&scan[1].likelihood / &scan[2].likelihood, ratio(10, 1));
        assert_eq!(scan[1].relative, ratio(1, 1));
        assert_eq!(scan[3].urns, 1);
        assert_eq!(scan[3].likelihood, ratio(1, 1_000_000));
    }

    #[test]
    fn scan_uneven_split_counts_both_sizes() {
        // 10 balls into round(10 / 3) = 3 urns: sizes 4, 3, 3
        let scan = uniform_ensemble_scan(10, rank(4), &[3]).unwrap();
        assert_eq!(scan[0].urns, 3);
        assert_eq!(scan[0].likelihood, ratio(1, 10));
    }

    #[test]
    fn nu_insensitivity_examples() {
        let dev = nu_insensitivity_check(&[10_000, 100_000, 1_000_000], rank(20), &[1, 2, 5, 10, 25]).unwrap();
        assert!(dev <= 1e-12);
        assert_eq!(nu_insensitivity_check(&[50_000], rank(20), &[1, 5]).unwrap(), 0.0);
        assert!(matches!(
            nu_insensitivity_check(&[20], rank(20), &[1]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn text_round_trip_and_errors() {
        let e = UrnEnsemble::new(vec![3, 0, 11]).unwrap();
        assert_eq!(UrnEnsemble::from_text(&e.to_text()).unwrap(), e);
        let parsed = UrnEnsemble::from_text("# header\n\n5\n 6 \n").unwrap();
        assert_eq!(parsed.counts(), &[5, 6]);
        match UrnEnsemble::from_text("1\n2\nthree\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn monte_carlo_deterministic_and_close() {
        let c = figure_two();
        let a = monte_carlo_oracle(&c, rank(3), 99, 200_000).unwrap();
        let b = monte_carlo_oracle(&c, rank(3), 99, 200_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.accepted[0], 0);
        let f = a.frequencies();
        assert!((f[1] - 5.0 / 6.0).abs() < 0.02);
    }

    #[test]
    fn monte_carlo_independent_of_thread_count() {
        let c = figure_two();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo_oracle(&c, rank(3), 5, 300_000).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn monte_carlo_no_acceptances() {
        assert_eq!(
            monte_carlo_oracle(&figure_two(), rank(25), 1, 10_000),
            Err(Error::InsufficientSamples { rank: 25, trials: 10_000 })
        );
    }
}
