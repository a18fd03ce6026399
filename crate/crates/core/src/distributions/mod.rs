//! Group-size distribution families and the observer-weighted transform.
//!
//! Populations are continuous positive reals here. A [`DistributionSpec`]
//! describes how group sizes are spread across an ensemble of groups; its
//! [`SizeBiasedView`] describes the group size experienced by a randomly
//! chosen *individual*, whose chance of landing in a group is proportional
//! to that group's size.
//!
//! | family              | view (size-biased)                       |
//! |---------------------|------------------------------------------|
//! | Pareto(α, n_min)    | Pareto(α − 1, n_min)                     |
//! | Lognormal(μ, σ)     | Lognormal(μ + σ², σ)                     |
//! | mixture of two      | mixture of the two views, reweighted by  |
//! | lognormals          | each component's mean                    |

mod sampling;

pub use sampling::{ks_critical_value, ks_statistic};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::quadrature::{self, Integral, Tolerance};
use crate::roots::{bisect, Bisection};

fn std_normal() -> Normal {
    Normal::standard()
}

fn phi(z: f64) -> f64 {
    std_normal().cdf(z)
}

fn phi_c(z: f64) -> f64 {
    std_normal().sf(z)
}

fn phi_inv(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

/// Pareto (type I) law: density `α n_minᵅ / N^(α+1)` for `N ≥ n_min`.
///
/// Any positive index is constructible; an index at or below one has no
/// finite mean, which only matters once something asks for the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pareto {
    alpha: f64,
    n_min: f64,
}

impl Pareto {
    pub fn new(alpha: f64, n_min: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Pareto index must be positive and finite, got {alpha}"
            )));
        }
        if !(n_min.is_finite() && n_min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Pareto minimum must be positive and finite, got {n_min}"
            )));
        }
        Ok(Pareto { alpha, n_min })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_min(&self) -> f64 {
        self.n_min
    }

    fn pdf(&self, n: f64) -> f64 {
        if n < self.n_min {
            0.0
        } else {
            self.alpha / n * (self.n_min / n).powf(self.alpha)
        }
    }

    fn sf(&self, n: f64) -> f64 {
        if n <= self.n_min {
            1.0
        } else {
            (self.n_min / n).powf(self.alpha)
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            self.n_min
        } else if p >= 1.0 {
            f64::INFINITY
        } else {
            self.n_min * (-(-p).ln_1p() / self.alpha).exp()
        }
    }

    fn mean(&self) -> Result<f64> {
        if self.alpha <= 1.0 {
            Err(Error::InfiniteMean { alpha: self.alpha })
        } else {
            Ok(self.alpha * self.n_min / (self.alpha - 1.0))
        }
    }
}

/// Lognormal law: `ln N ~ Normal(mu_log, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lognormal {
    mu_log: f64,
    sigma: f64,
}

impl Lognormal {
    pub fn new(mu_log: f64, sigma: f64) -> Result<Self> {
        if !mu_log.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lognormal location must be finite, got {mu_log}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lognormal sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Lognormal { mu_log, sigma })
    }

    pub fn mu_log(&self) -> f64 {
        self.mu_log
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn z(&self, n: f64) -> f64 {
        (n.ln() - self.mu_log) / self.sigma
    }

    fn pdf(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 0.0;
        }
        let z = self.z(n);
        (-0.5 * z * z).exp() / (n * self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    fn cdf(&self, n: f64) -> f64 {
        if n <= 0.0 {
            0.0
        } else {
            phi(self.z(n))
        }
    }

    fn sf(&self, n: f64) -> f64 {
        if n <= 0.0 {
            1.0
        } else {
            phi_c(self.z(n))
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else if p >= 1.0 {
            f64::INFINITY
        } else {
            (self.mu_log + self.sigma * phi_inv(p)).exp()
        }
    }

    /// Natural log of the mean.
    fn ln_mean(&self) -> f64 {
        self.mu_log + 0.5 * self.sigma * self.sigma
    }

    fn size_biased(&self) -> Lognormal {
        Lognormal {
            mu_log: self.mu_log + self.sigma * self.sigma,
            sigma: self.sigma,
        }
    }
}

/// Two-component lognormal mixture; `weight` is the first component's share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BimodalLognormal {
    weight: f64,
    first: Lognormal,
    second: Lognormal,
}

impl BimodalLognormal {
    pub fn new(weight: f64, first: Lognormal, second: Lognormal) -> Result<Self> {
        if !(weight > 0.0 && weight < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mixture weight must lie in (0, 1), got {weight}"
            )));
        }
        Ok(BimodalLognormal {
            weight,
            first,
            second,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn first(&self) -> Lognormal {
        self.first
    }

    pub fn second(&self) -> Lognormal {
        self.second
    }

    fn pdf(&self, n: f64) -> f64 {
        self.weight * self.first.pdf(n) + (1.0 - self.weight) * self.second.pdf(n)
    }

    fn cdf(&self, n: f64) -> f64 {
        self.weight * self.first.cdf(n) + (1.0 - self.weight) * self.second.cdf(n)
    }

    fn sf(&self, n: f64) -> f64 {
        self.weight * self.first.sf(n) + (1.0 - self.weight) * self.second.sf(n)
    }

    fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let a = self.first.quantile(p);
        let b = self.second.quantile(p);
        let (lo, hi) = (a.min(b).ln(), a.max(b).ln());
        if lo == hi {
            return a;
        }
        let target = |u: f64| {
            let n = u.exp();
            // compare on whichever side of the median keeps precision
            if p < 0.5 {
                self.cdf(n) - p
            } else {
                (1.0 - p) - self.sf(n)
            }
        };
        bisect(target, lo, hi, Bisection::default())
            .map(f64::exp)
            .unwrap_or_else(|_| (0.5 * (lo + hi)).exp())
    }

    fn ln_mean(&self) -> f64 {
        let a = self.weight.ln() + self.first.ln_mean();
        let b = (1.0 - self.weight).ln() + self.second.ln_mean();
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln()
    }

    /// Each component is size-biased and the shares are reweighted by the
    /// components' means. The resulting weight may round to 0 or 1.
    fn size_biased(&self) -> BimodalLognormal {
        let a = self.weight.ln() + self.first.ln_mean();
        let b = (1.0 - self.weight).ln() + self.second.ln_mean();
        let weight = 1.0 / (1.0 + (b - a).exp());
        BimodalLognormal {
            weight,
            first: self.first.size_biased(),
            second: self.second.size_biased(),
        }
    }
}

/// A family of group-size distributions with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Pareto(Pareto),
    Lognormal(Lognormal),
    BimodalLognormal(BimodalLognormal),
}

impl From<Pareto> for DistributionSpec {
    fn from(p: Pareto) -> Self {
        DistributionSpec::Pareto(p)
    }
}

impl From<Lognormal> for DistributionSpec {
    fn from(l: Lognormal) -> Self {
        DistributionSpec::Lognormal(l)
    }
}

impl From<BimodalLognormal> for DistributionSpec {
    fn from(b: BimodalLognormal) -> Self {
        DistributionSpec::BimodalLognormal(b)
    }
}

/// How a distribution's support is laid out on the `ln N` axis, used to map
/// infinite integration ranges onto the unit interval.
#[derive(Debug, Clone, Copy)]
enum LogFrame {
    /// `ln N` in `[start, ∞)` with natural decay length `scale`.
    HalfLine { start: f64, scale: f64 },
    /// `ln N` over the whole real line, centred at `centre`.
    Line { centre: f64, scale: f64 },
}

impl DistributionSpec {
    pub fn pareto(alpha: f64, n_min: f64) -> Result<Self> {
        Pareto::new(alpha, n_min).map(Into::into)
    }

    pub fn lognormal(mu_log: f64, sigma: f64) -> Result<Self> {
        Lognormal::new(mu_log, sigma).map(Into::into)
    }

    pub fn bimodal(weight: f64, first: Lognormal, second: Lognormal) -> Result<Self> {
        BimodalLognormal::new(weight, first, second).map(Into::into)
    }

    /// Probability density at population `n`; zero outside the support.
    pub fn pdf(&self, n: f64) -> f64 {
        match self {
            DistributionSpec::Pareto(p) => p.pdf(n),
            DistributionSpec::Lognormal(l) => l.pdf(n),
            DistributionSpec::BimodalLognormal(b) => b.pdf(n),
        }
    }

    pub fn cdf(&self, n: f64) -> f64 {
        match self {
            DistributionSpec::Pareto(p) => 1.0 - p.sf(n),
            DistributionSpec::Lognormal(l) => l.cdf(n),
            DistributionSpec::BimodalLognormal(b) => b.cdf(n),
        }
    }

    /// Survival function `1 - cdf(n)`, accurate in the upper tail.
    pub fn sf(&self, n: f64) -> f64 {
        match self {
            DistributionSpec::Pareto(p) => p.sf(n),
            DistributionSpec::Lognormal(l) => l.sf(n),
            DistributionSpec::BimodalLognormal(b) => b.sf(n),
        }
    }

    /// Inverse CDF. `p = 0` gives the lower support bound, `p = 1` infinity.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(match self {
            DistributionSpec::Pareto(d) => d.quantile(p),
            DistributionSpec::Lognormal(d) => d.quantile(p),
            DistributionSpec::BimodalLognormal(d) => d.quantile(p),
        })
    }

    pub fn mean(&self) -> Result<f64> {
        match self {
            DistributionSpec::Pareto(p) => p.mean(),
            DistributionSpec::Lognormal(l) => Ok(l.ln_mean().exp()),
            DistributionSpec::BimodalLognormal(b) => Ok(b.ln_mean().exp()),
        }
    }

    /// Lower and upper bounds of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DistributionSpec::Pareto(p) => (p.n_min, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Population of the median group.
    pub fn median_group(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid probability")
    }

    /// Population of the group containing the median individual.
    pub fn median_individual(&self) -> Result<f64> {
        Ok(self.size_biased()?.median())
    }

    /// The distribution of group size as seen by individuals.
    pub fn size_biased(&self) -> Result<SizeBiasedView> {
        let normalizer = self.mean()?;
        let equivalent = match self {
            DistributionSpec::Pareto(p) => DistributionSpec::Pareto(Pareto {
                alpha: p.alpha - 1.0,
                n_min: p.n_min,
            }),
            DistributionSpec::Lognormal(l) => DistributionSpec::Lognormal(l.size_biased()),
            DistributionSpec::BimodalLognormal(b) => {
                DistributionSpec::BimodalLognormal(b.size_biased())
            }
        };
        Ok(SizeBiasedView {
            base: *self,
            normalizer,
            equivalent,
        })
    }

    fn log_frame(&self) -> LogFrame {
        match self {
            DistributionSpec::Pareto(p) => LogFrame::HalfLine {
                start: p.n_min.ln(),
                scale: 1.0 / p.alpha,
            },
            DistributionSpec::Lognormal(l) => LogFrame::Line {
                centre: l.mu_log,
                scale: l.sigma,
            },
            DistributionSpec::BimodalLognormal(b) => {
                let spread = (b.first.mu_log - b.second.mu_log).abs();
                LogFrame::Line {
                    centre: 0.5 * (b.first.mu_log + b.second.mu_log),
                    scale: b.first.sigma.max(b.second.sigma).max(0.5 * spread),
                }
            }
        }
    }

    /// `∫ g(N) dN` over the support, evaluated on the `ln N` axis.
    pub fn integrate_over_support<G: Fn(f64) -> f64>(&self, g: G, tol: Tolerance) -> Result<Integral> {
        integrate_log_axis(self.log_frame(), g, tol)
    }

    /// Draw `count` populations from a generator seeded with `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        sampling::sample(self, seed, count)
    }
}

fn integrate_log_axis<G: Fn(f64) -> f64>(frame: LogFrame, g: G, tol: Tolerance) -> Result<Integral> {
    match frame {
        LogFrame::HalfLine { start, scale } => quadrature::integrate_to_infinity(
            |x| {
                let n = (start + scale * x).exp();
                g(n) * n * scale
            },
            0.0,
            tol,
        ),
        LogFrame::Line { centre, scale } => quadrature::integrate_real_line(
            |x| {
                let n = (centre + scale * x).exp();
                g(n) * n * scale
            },
            tol,
        ),
    }
}

/// Observer-weighted view of a distribution: density `N · pdf(N) / mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeBiasedView {
    base: DistributionSpec,
    normalizer: f64,
    equivalent: DistributionSpec,
}

impl SizeBiasedView {
    pub fn base(&self) -> &DistributionSpec {
        &self.base
    }

    /// Mean of the base distribution.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// The closed-form family the view belongs to.
    pub fn as_spec(&self) -> &DistributionSpec {
        &self.equivalent
    }

    pub fn density(&self, n: f64) -> f64 {
        n * self.base.pdf(n) / self.normalizer
    }

    pub fn cdf(&self, n: f64) -> f64 {
        self.equivalent.cdf(n)
    }

    pub fn sf(&self, n: f64) -> f64 {
        self.equivalent.sf(n)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.equivalent.quantile(p)
    }

    pub fn median(&self) -> f64 {
        self.equivalent.median_group()
    }

    /// Mean group size seen by individuals (`∫N²pdf / μ`).
    pub fn mean(&self) -> Result<f64> {
        self.equivalent.mean()
    }

    /// `∫ g(N) · density(N) dN` over the support.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, tol: Tolerance) -> Result<Integral> {
        integrate_log_axis(self.equivalent.log_frame(), |n| g(n) * self.density(n), tol)
    }
}
