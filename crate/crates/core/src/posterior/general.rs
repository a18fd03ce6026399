//! Posterior on group size marginalized over a Pareto family.
//!
//! For each candidate size `N` the density is
//!
//! ```text
//! p(N | r) ∝ ∫∫ pdf(N | α, n_min) / mean(α, n_min) · π(α) π(n_min) dα dn_min,   N ≥ cut
//! ```
//!
//! with `pdf / mean = (α-1) n_min^(α-1) / N^(α+1)` on `n_min ≤ N`. Writing
//! `β = α - 1` and `u = ln n_min`, a Jeffreys prior on `n_min` turns the inner
//! integral into `N⁻² ∫ β exp(β (u - ln N)) du`, which is what gets
//! integrated here. The outer integral runs over `ln β` so that indices
//! close to one are resolved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

use super::closed_form::pareto_closed_form;
use super::tabulated::{GridSpec, TabulatedPosterior, Variable};

/// Largest Pareto index the marginalization integrates over.
pub const ALPHA_MAX: f64 = 20.0;
/// Smallest `α - 1` resolved by the outer integral.
const BETA_FLOOR: f64 = 1e-12;
/// `β · (ln n_min - ln N)` below which the inner integrand is dropped (`e^-40`).
const INNER_CUTOFF: f64 = 40.0;

/// Prior on the Pareto index, supported on `(1, ∞)`.
#[derive(Debug, Clone, Copy)]
pub enum AlphaPrior {
    PointMass(f64),
    Uniform { lo: f64, hi: f64 },
    /// `rate · exp(-rate (α - 1))`.
    Exponential { rate: f64 },
    /// Any nonnegative density; normalized numerically on `(1, ALPHA_MAX]`.
    Custom(fn(f64) -> f64),
}

impl AlphaPrior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AlphaPrior::PointMass(a) if a.is_finite() && a > 1.0 => Ok(()),
            AlphaPrior::PointMass(a) => Err(Error::InfiniteMean { alpha: a }),
            AlphaPrior::Uniform { lo, .. } if lo < 1.0 => Err(Error::InfiniteMean { alpha: lo }),
            AlphaPrior::Uniform { lo, hi } if hi.is_finite() && hi > lo => Ok(()),
            AlphaPrior::Uniform { lo, hi } => Err(Error::ImproperPrior(format!(
                "uniform prior on [{lo}, {hi}] cannot be normalized"
            ))),
            AlphaPrior::Exponential { rate } if rate.is_finite() && rate > 0.0 => Ok(()),
            AlphaPrior::Exponential { rate } => Err(Error::ImproperPrior(format!(
                "exponential prior needs a positive rate, got {rate}"
            ))),
            AlphaPrior::Custom(f) => {
                let mut negative = false;
                let total = integrate(
                    |t: f64| {
                        let beta = t.exp();
                        let v = f(1.0 + beta);
                        negative |= v < 0.0;
                        v * beta
                    },
                    BETA_FLOOR.ln(),
                    (ALPHA_MAX - 1.0).ln(),
                    Tolerance::default(),
                )
                .map_err(|e| Error::ImproperPrior(format!("custom prior does not integrate: {e}")))?;
                if negative || !(total.value.is_finite() && total.value > 0.0) {
                    return Err(Error::ImproperPrior(format!(
                        "custom prior must be a nonnegative density with finite positive mass, got {}",
                        total.value
                    )));
                }
                Ok(())
            }
        }
    }

    fn density(&self, alpha: f64) -> f64 {
        match *self {
            AlphaPrior::PointMass(_) => 0.0,
            AlphaPrior::Uniform { lo, hi } => {
                if (lo..=hi).contains(&alpha) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            AlphaPrior::Exponential { rate } => rate * (-rate * (alpha - 1.0)).exp(),
            AlphaPrior::Custom(f) => f(alpha),
        }
    }

    /// Range of `β = α - 1` to integrate over.
    fn beta_range(&self) -> (f64, f64) {
        let top = ALPHA_MAX - 1.0;
        match *self {
            AlphaPrior::Uniform { lo, hi } => ((lo - 1.0).max(BETA_FLOOR), (hi - 1.0).min(top)),
            _ => (BETA_FLOOR, top),
        }
    }
}

/// Prior on the minimum group size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NminPrior {
    /// `∝ 1 / n_min` on `[lo, hi]`.
    Jeffreys { lo: f64, hi: f64 },
    PointMass(f64),
}

impl NminPrior {
    /// Jeffreys prior over `[1e-100, 1e100]`, wide enough that the truncation
    /// does not show in posteriors for any rank that fits in an `f64` grid.
    pub fn jeffreys_wide() -> Self {
        NminPrior::Jeffreys { lo: 1e-100, hi: 1e100 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NminPrior::Jeffreys { lo, hi } if lo > 0.0 && hi.is_finite() && hi > lo => Ok(()),
            NminPrior::Jeffreys { lo, hi } => Err(Error::ImproperPrior(format!(
                "Jeffreys prior needs 0 < lo < hi < ∞, got [{lo}, {hi}]"
            ))),
            NminPrior::PointMass(m) if m.is_finite() && m > 0.0 => Ok(()),
            NminPrior::PointMass(m) => Err(Error::InvalidParameter(format!("n_min must be positive, got {m}"))),
        }
    }

    /// `N² ∫ π(n_min) pdf(N | β + 1, n_min) / mean dn_min`, up to a constant.
    fn kernel(&self, beta: f64, ln_n: f64, tol: Tolerance) -> Result<f64> {
        match *self {
            NminPrior::PointMass(m) => {
                let w = m.ln() - ln_n;
                Ok(if w > 0.0 { 0.0 } else { beta * (beta * w).exp() })
            }
            NminPrior::Jeffreys { lo, hi } => {
                let upper = hi.ln().min(ln_n) - ln_n;
                let lower = (lo.ln() - ln_n).max(-INNER_CUTOFF / beta);
                if upper <= lower {
                    return Ok(0.0);
                }
                Ok(integrate(|w| beta * (beta * w).exp(), lower, upper, tol)?.value)
            }
        }
    }
}

/// Separable prior `π(α) π(n_min)` on the Pareto parameters.
#[derive(Debug, Clone, Copy)]
pub struct ParameterPrior {
    pub alpha: AlphaPrior,
    pub n_min: NminPrior,
}

impl ParameterPrior {
    pub fn new(alpha: AlphaPrior, n_min: NminPrior) -> Result<Self> {
        alpha.validate()?;
        n_min.validate()?;
        Ok(ParameterPrior { alpha, n_min })
    }

    /// `alpha` combined with the wide Jeffreys prior on `n_min`.
    pub fn jeffreys(alpha: AlphaPrior) -> Result<Self> {
        ParameterPrior::new(alpha, NminPrior::jeffreys_wide())
    }
}

/// Where the posterior support starts for an observed rank `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankCut {
    /// `N ≥ r - ½`: continuous treatment of a discrete rank.
    #[default]
    HalfInteger,
    /// `N ≥ r`.
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneralOptions {
    pub cut: RankCut,
    pub grid: GridSpec,
}

/// Integrate the unnormalized posterior density at size `n` (times `n²`).
fn marginal(prior: &ParameterPrior, n: f64) -> Result<f64> {
    let ln_n = n.ln();
    let inner_tol = Tolerance::new(1e-13, 1e-9);
    if let AlphaPrior::PointMass(a) = prior.alpha {
        return prior.n_min.kernel(a - 1.0, ln_n, inner_tol);
    }
    let (b_lo, b_hi) = prior.alpha.beta_range();
    let mut failure = None;
    let outer = integrate(
        |t| {
            let beta = t.exp();
            match prior.n_min.kernel(beta, ln_n, inner_tol) {
                Ok(k) => prior.alpha.density(1.0 + beta) * beta * k,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        b_lo.ln(),
        b_hi.ln(),
        Tolerance::new(1e-12, 1e-8),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(outer.value),
    }
}

/// Posterior on group size after observing rank `r`, marginalized over the
/// Pareto parameters. Grid points are evaluated in parallel; each one is
/// independent, so the output does not depend on the thread count.
pub fn general_posterior(prior: &ParameterPrior, r: f64, opts: &GeneralOptions) -> Result<TabulatedPosterior> {
    prior.alpha.validate()?;
    prior.n_min.validate()?;
    opts.grid.validate()?;
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidParameter(format!("rank must be >= 1, got {r}")));
    }
    let start = match opts.cut {
        RankCut::HalfInteger => r - 0.5,
        RankCut::Integer => r,
    };
    let grid = opts.grid.above(start);
    let density = grid
        .par_iter()
        .map(|&n| marginal(prior, n).map(|m| m / (n * n)))
        .collect::<Result<Vec<f64>>>()?;
    TabulatedPosterior::from_density(Variable::GroupSize, grid, density)
}

/// Sup-norm spreads of posteriors under different index priors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsensitivityReport {
    /// Largest gap between any two of the posteriors.
    pub max_pairwise: f64,
    /// Largest gap between any posterior and `r½ / N²`.
    pub max_vs_closed_form: f64,
}

/// Run [`general_posterior`] once per index prior (Jeffreys on `n_min`) and
/// compare the results. Distances are measured on densities over `N / r`.
pub fn prior_insensitivity_check(priors: &[AlphaPrior], r: f64, grid: &GridSpec) -> Result<InsensitivityReport> {
    if priors.is_empty() {
        return Err(Error::Precondition("need at least one prior".into()));
    }
    let opts = GeneralOptions {
        cut: RankCut::HalfInteger,
        grid: *grid,
    };
    let reference = pareto_closed_form(r, grid)?;
    let posts = priors
        .iter()
        .map(|a| general_posterior(&ParameterPrior::jeffreys(*a)?, r, &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut report = InsensitivityReport {
        max_pairwise: 0.0,
        max_vs_closed_form: 0.0,
    };
    for (i, p) in posts.iter().enumerate() {
        report.max_vs_closed_form = report.max_vs_closed_form.max(p.sup_distance(&reference, r)?);
        for q in &posts[i + 1..] {
            report.max_pairwise = report.max_pairwise.max(p.sup_distance(q, r)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> GridSpec {
        GridSpec {
            points: 512,
            ..GridSpec::default()
        }
    }

    #[test]
    fn point_mass_prior_gives_truncated_pareto() {
        // α = 2, n_min = 1: p(N | r) ∝ N⁻³ on N ≥ 10, median 10·√2
        let prior = ParameterPrior::new(AlphaPrior::PointMass(2.0), NminPrior::PointMass(1.0)).unwrap();
        let opts = GeneralOptions {
            cut: RankCut::Integer,
            grid: GridSpec::default(),
        };
        let post = general_posterior(&prior, 10.0, &opts).unwrap();
        assert_eq!(post.grid()[0], 10.0);
        assert!((post.median() - 10.0 * 2f64.sqrt()).abs() < 1e-3);
        assert!((post.normalization() - 1.0).abs() < 1e-9);
        assert!((post.density()[0] - 2.0 / 10.0).abs() < 1e-5);
    }

    #[test]
    fn nothing_below_the_cut() {
        let prior = ParameterPrior::jeffreys(AlphaPrior::Uniform { lo: 1.0, hi: 3.0 }).unwrap();
        let post = general_posterior(
            &prior,
            10.0,
            &GeneralOptions {
                cut: RankCut::Integer,
                grid: small_grid(),
            },
        )
        .unwrap();
        assert!(post.grid()[0] >= 10.0);
        assert_eq!(post.cdf_at(9.99), 0.0);
    }

    #[test]
    fn jeffreys_matches_closed_form() {
        let prior = ParameterPrior::jeffreys(AlphaPrior::Exponential { rate: 1.0 }).unwrap();
        let grid = small_grid();
        let post = general_posterior(&prior, 10.0, &GeneralOptions { grid, ..Default::default() }).unwrap();
        let exact = pareto_closed_form(10.0, &grid).unwrap();
        assert!(post.sup_distance(&exact, 10.0).unwrap() < 1e-3);
    }

    #[test]
    fn invalid_priors_rejected() {
        assert_eq!(AlphaPrior::PointMass(1.0).validate(), Err(Error::InfiniteMean { alpha: 1.0 }));
        assert!(matches!(
            AlphaPrior::Uniform { lo: 0.5, hi: 3.0 }.validate(),
            Err(Error::InfiniteMean { .. })
        ));
        assert!(matches!(
            AlphaPrior::Uniform { lo: 1.0, hi: f64::INFINITY }.validate(),
            Err(Error::ImproperPrior(_))
        ));
        assert!(matches!(
            AlphaPrior::Exponential { rate: 0.0 }.validate(),
            Err(Error::ImproperPrior(_))
        ));
        assert!(matches!(AlphaPrior::Custom(|_| -1.0).validate(), Err(Error::ImproperPrior(_))));
        assert!(matches!(AlphaPrior::Custom(|_| 0.0).validate(), Err(Error::ImproperPrior(_))));
        assert!(AlphaPrior::Custom(|a| (-(a - 2.0) * (a - 2.0)).exp()).validate().is_ok());
        assert!(NminPrior::Jeffreys { lo: 0.0, hi: 1.0 }.validate().is_err());
    }

    #[test]
    fn single_prior_has_zero_pairwise_spread() {
        let report = prior_insensitivity_check(&[AlphaPrior::PointMass(2.0)], 5.0, &small_grid()).unwrap();
        assert_eq!(report.max_pairwise, 0.0);
        assert!(report.max_vs_closed_form < 1e-4);
    }
}
