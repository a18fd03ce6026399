//! Toy models of civilization population size, calibrated so that the
//! median individual lives in a population of 7 billion.

use std::fmt::Write as _;

use serde::Serialize;

use crate::distributions::{DistributionSpec, Lognormal};
use crate::error::{Error, Result};
use crate::roots::{bisect, Bisection};

pub const TARGET_MI: f64 = 7e9;
/// Minimum viable population used for the Pareto model.
pub const PARETO_N_MIN: f64 = 4000.0;
/// Lognormal width giving an exceedance fraction near `1e-4`.
pub const LOGNORMAL_SIGMA: f64 = 3.7;
/// Required relative accuracy of a calibrated `M_I`.
pub const CALIBRATION_RTOL: f64 = 1e-6;

/// Shape of the two-component lognormal before it is shifted onto the
/// target. The first component is the lower one and carries `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BimodalShape {
    pub weight: f64,
    pub sigma_low: f64,
    pub sigma_high: f64,
    /// Ratio of the component medians.
    pub separation: f64,
}

impl Default for BimodalShape {
    fn default() -> Self {
        BimodalShape {
            weight: 0.98,
            sigma_low: 1.5,
            sigma_high: 1.5,
            separation: 1e4,
        }
    }
}

fn solve(mut mi: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, target: f64) -> Result<f64> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidParameter(format!("target must be positive, got {target}")));
    }
    let ln_t = target.ln();
    let mut failure = None;
    let x = bisect(
        |x| match mi(x) {
            Ok(m) => m.ln() - ln_t,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        Bisection::default(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let reached = mi(x)?;
    if ((reached - target) / target).abs() > CALIBRATION_RTOL {
        return Err(Error::NoRoot(format!(
            "calibration stalled at M_I = {reached:e}, target {target:e}"
        )));
    }
    Ok(x)
}

/// Pareto with the given minimum whose `M_I` equals `target`, by bisection
/// on `α ∈ (1, 20]`.
pub fn calibrate_pareto(n_min: f64, target: f64) -> Result<DistributionSpec> {
    if !(target > n_min) {
        return Err(Error::InvalidParameter(format!(
            "target {target} must exceed n_min {n_min}"
        )));
    }
    let alpha = solve(
        |a| DistributionSpec::pareto(a, n_min)?.median_individual(),
        1.0 + 1e-9,
        20.0,
        target,
    )?;
    DistributionSpec::pareto(alpha, n_min)
}

/// Lognormal of width `sigma` whose `M_I` equals `target`:
/// `μ = ln target - σ²`.
pub fn calibrate_lognormal(sigma: f64, target: f64) -> Result<DistributionSpec> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidParameter(format!("target must be positive, got {target}")));
    }
    DistributionSpec::lognormal(target.ln() - sigma * sigma, sigma)
}

/// Mixture with the given shape, shifted in `ln N` until `M_I` equals
/// `target`.
pub fn calibrate_bimodal(shape: &BimodalShape, target: f64) -> Result<DistributionSpec> {
    if !(shape.separation.is_finite() && shape.separation >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "separation must be at least 1, got {}",
            shape.separation
        )));
    }
    let gap = shape.separation.ln();
    let build = |offset: f64| {
        DistributionSpec::bimodal(
            shape.weight,
            Lognormal::new(offset, shape.sigma_low)?,
            Lognormal::new(offset + gap, shape.sigma_high)?,
        )
    };
    build(0.0)?;
    let reach = 50.0 + 5.0 * shape.sigma_low.max(shape.sigma_high).powi(2);
    let centre = target.ln();
    let offset = solve(|s| build(s)?.median_individual(), centre - gap - reach, centre + reach, target)?;
    build(offset)
}

/// The three default models: Pareto, lognormal and bimodal lognormal.
pub fn default_models() -> Result<[DistributionSpec; 3]> {
    Ok([
        calibrate_pareto(PARETO_N_MIN, TARGET_MI)?,
        calibrate_lognormal(LOGNORMAL_SIGMA, TARGET_MI)?,
        calibrate_bimodal(&BimodalShape::default(), TARGET_MI)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FermiModelReport {
    pub spec: DistributionSpec,
    /// Median group size.
    pub m_group: f64,
    /// Size of the group holding the median individual.
    pub m_individual: f64,
    /// Fraction of groups larger than `m_individual`.
    pub frac_exceeding: f64,
}

impl FermiModelReport {
    pub fn ratio(&self) -> f64 {
        self.m_individual / self.m_group
    }
}

pub fn report(spec: &DistributionSpec) -> Result<FermiModelReport> {
    let m_individual = spec.median_individual()?;
    Ok(FermiModelReport {
        spec: *spec,
        m_group: spec.median_group(),
        m_individual,
        frac_exceeding: spec.sf(m_individual),
    })
}

/// True and size-biased densities on a shared log grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FermiCurves {
    pub n: Vec<f64>,
    pub pdf_true: Vec<f64>,
    pub pdf_size_biased: Vec<f64>,
    pub m_group: f64,
    pub m_individual: f64,
    /// Quadrature mass on the grid plus exact mass outside it.
    pub mass_true: f64,
    pub mass_size_biased: f64,
}

/// Tabulates both densities from the lower `1e-9` quantile (or the support
/// edge) to the upper `1e-9` quantile of the size-biased view.
pub fn curves(spec: &DistributionSpec, points: usize) -> Result<FermiCurves> {
    if points < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 points, got {points}")));
    }
    let view = spec.size_biased()?;
    let lo = match spec.support().0 {
        edge if edge > 0.0 => edge,
        _ => spec.quantile(1e-9)?,
    };
    let hi = view.quantile(1.0 - 1e-9)?;
    let (a, b) = (lo.ln(), hi.ln());
    let n: Vec<f64> = (0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        })
        .collect();
    let pdf_true: Vec<f64> = n.iter().map(|&x| spec.pdf(x)).collect();
    let pdf_size_biased: Vec<f64> = n.iter().map(|&x| view.density(x)).collect();
    // Simpson in ln N on the evenly spaced log grid, trapezoid on a leftover cell.
    let h = (b - a) / (points - 1) as f64;
    let log_mass = |p: &[f64]| -> f64 {
        let g: Vec<f64> = n.iter().zip(p).map(|(x, p)| x * p).collect();
        let even = (g.len() - 1) / 2 * 2;
        let simpson: f64 = (0..even)
            .step_by(2)
            .map(|i| h / 3.0 * (g[i] + 4.0 * g[i + 1] + g[i + 2]))
            .sum();
        let rest = if even < g.len() - 1 { 0.5 * h * (g[even] + g[even + 1]) } else { 0.0 };
        simpson + rest
    };
    Ok(FermiCurves {
        mass_true: log_mass(&pdf_true) + spec.cdf(lo) + spec.sf(hi),
        mass_size_biased: log_mass(&pdf_size_biased) + view.cdf(lo) + view.sf(hi),
        m_group: spec.median_group(),
        m_individual: view.median(),
        n,
        pdf_true,
        pdf_size_biased,
    })
}

impl FermiCurves {
    /// `N,pdf_true,pdf_size_biased`, preceded by a `#` line carrying the
    /// `M_G` and `M_I` markers.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {{\"m_group\":{:e},\"m_individual\":{:e},\"mass_true\":{},\"mass_size_biased\":{}}}",
            self.m_group, self.m_individual, self.mass_true, self.mass_size_biased
        );
        out.push_str("N,pdf_true,pdf_size_biased\n");
        for i in 0..self.n.len() {
            let _ = writeln!(out, "{:e},{:e},{:e}", self.n[i], self.pdf_true[i], self.pdf_size_biased[i]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn pareto_matches_closed_form() {
        let spec = calibrate_pareto(4000.0, 7e9).unwrap();
        let DistributionSpec::Pareto(p) = spec else { panic!() };
        let closed = 1.0 + 2f64.ln() / (7e9f64 / 4000.0).ln();
        assert!((p.alpha() - closed).abs() < 1e-6);
        assert!((p.alpha() - 1.0482).abs() < 1e-3);
        let r = report(&spec).unwrap();
        assert!((r.m_individual / 7e9 - 1.0).abs() < 1e-6);
        assert!((r.frac_exceeding - (4000.0f64 / 7e9).powf(closed)).abs() < 1e-9);
        assert!(r.m_group < 1e6);
    }

    #[test]
    fn pareto_double_minimum_gives_index_two() {
        let DistributionSpec::Pareto(p) = calibrate_pareto(10.0, 20.0).unwrap() else { panic!() };
        assert!((p.alpha() - 2.0).abs() < 1e-6);
        assert!(calibrate_pareto(10.0, 10.0).is_err());
    }

    #[test]
    fn lognormal_identity() {
        let spec = calibrate_lognormal(3.7, 7e9).unwrap();
        let DistributionSpec::Lognormal(l) = spec else { panic!() };
        assert!((l.mu_log() - 8.97918).abs() < 1e-4);
        let r = report(&spec).unwrap();
        let tail = Normal::standard().cdf(-3.7);
        assert!((r.frac_exceeding - tail).abs() < 1e-9);
        let narrow = report(&calibrate_lognormal(1e-3, 7e9).unwrap()).unwrap();
        assert!((narrow.m_group / 7e9 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn bimodal_default() {
        let r = report(&calibrate_bimodal(&BimodalShape::default(), 7e9).unwrap()).unwrap();
        assert!((r.m_individual / 7e9 - 1.0).abs() < 1e-3);
        assert!((5e-4..=5e-3).contains(&r.frac_exceeding), "{}", r.frac_exceeding);
        assert!(r.m_group < 1e6);
        assert!(r.ratio() > 1e3);
    }

    #[test]
    fn curves_markers_and_mass() {
        for spec in default_models().unwrap() {
            let c = curves(&spec, 4096).unwrap();
            assert!((c.mass_true - 1.0).abs() < 1e-5, "{spec:?} {}", c.mass_true);
            assert!((c.mass_size_biased - 1.0).abs() < 1e-5, "{spec:?} {}", c.mass_size_biased);
            assert_eq!(c.m_individual, spec.median_individual().unwrap());
        }
        let c = curves(&DistributionSpec::pareto(2.5, 1.0).unwrap(), 64).unwrap();
        // size-biased Pareto density is proportional to N^-α
        let k = c.pdf_size_biased[0];
        for (x, p) in c.n.iter().zip(&c.pdf_size_biased) {
            assert!((p / (k * x.powf(-2.5)) - 1.0).abs() < 1e-9);
        }
        assert!(c.to_csv().lines().nth(1) == Some("N,pdf_true,pdf_size_biased"));
    }
}
