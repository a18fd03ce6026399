//! Extinction forecasts in calendar time.
//!
//! Future births are mapped to years with a constant birth rate, so the
//! probability that extinction has happened by year `t` is the posterior CDF
//! of `B` at `rate · (t - epoch)`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::posterior::{future_count_posterior, GridSpec, RankPrior, TabulatedPosterior, Variable};
use crate::roots::{bisect, Bisection};

/// Default annual extinction probabilities for the baseline curves.
pub const BASELINE_HAZARDS: [f64; 2] = [0.002, 0.0002];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirthRateModel {
    /// Births per year.
    pub rate: f64,
    /// Calendar year at which `B = 0`.
    pub epoch: f64,
}

impl Default for BirthRateModel {
    fn default() -> Self {
        BirthRateModel {
            rate: 1.4e8,
            epoch: 2016.0,
        }
    }
}

impl BirthRateModel {
    pub fn new(rate: f64, epoch: f64) -> Result<Self> {
        let m = BirthRateModel { rate, epoch };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::InvalidParameter(format!("birth rate must be positive, got {}", self.rate)));
        }
        if !self.epoch.is_finite() {
            return Err(Error::InvalidParameter("epoch must be finite".into()));
        }
        Ok(())
    }

    /// Cumulative births between the epoch and `year`.
    pub fn births_to_year(&self, year: f64) -> Result<f64> {
        if !(year >= self.epoch) {
            return Err(Error::InvalidParameter(format!(
                "year {year} precedes the epoch {}",
                self.epoch
            )));
        }
        Ok(self.rate * (year - self.epoch))
    }

    /// Inverse of [`births_to_year`](Self::births_to_year).
    pub fn year_of_births(&self, births: f64) -> f64 {
        self.epoch + births / self.rate
    }
}

/// Evenly spaced calendar years `start, start + step, …` not exceeding `end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YearRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl YearRange {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("year step must be positive, got {step}")));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidParameter(format!("year range [{start}, {end}] is empty")));
        }
        Ok(YearRange { start, end, step })
    }

    pub fn years(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + self.step * i as f64).collect()
    }
}

/// Cumulative extinction probability and annual hazard on a year grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastCurve {
    years: Vec<f64>,
    p_extinct: Vec<f64>,
    hazard: Vec<f64>,
}

impl ForecastCurve {
    /// Builds a curve from cumulative probabilities; the hazard
    /// `(dP/dt) / (1 - P)` uses centred differences inside the range and three-point
    /// one-sided differences at the ends.
    pub fn from_probabilities(years: Vec<f64>, p_extinct: Vec<f64>) -> Result<Self> {
        if years.len() < 2 || years.len() != p_extinct.len() {
            return Err(Error::InvalidParameter("curve needs at least two matching points".into()));
        }
        if years.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("years must increase".into()));
        }
        if p_extinct.iter().any(|p| !(0.0..=1.0).contains(p)) || p_extinct.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("probabilities must be nondecreasing in [0, 1]".into()));
        }
        let n = years.len();
        let hazard = (0..n)
            .map(|i| {
                let slope = slope_at(&years, &p_extinct, i).max(0.0);
                let survival = 1.0 - p_extinct[i];
                if survival > 0.0 {
                    slope / survival
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        Ok(ForecastCurve {
            years,
            p_extinct,
            hazard,
        })
    }

    pub fn years(&self) -> &[f64] {
        &self.years
    }

    pub fn p_extinct(&self) -> &[f64] {
        &self.p_extinct
    }

    pub fn hazard(&self) -> &[f64] {
        &self.hazard
    }

    /// Probability by `year`, linear between grid years.
    pub fn p_at(&self, year: f64) -> Option<f64> {
        let (first, last) = (self.years[0], self.years[self.years.len() - 1]);
        if !(first..=last).contains(&year) {
            return None;
        }
        let i = self.years.partition_point(|&y| y <= year).min(self.years.len() - 1).max(1);
        let (y0, y1) = (self.years[i - 1], self.years[i]);
        let (p0, p1) = (self.p_extinct[i - 1], self.p_extinct[i]);
        Some(p0 + (p1 - p0) * (year - y0) / (y1 - y0))
    }
}

/// Centred difference inside the range, three-point one-sided differences
/// at the ends.
fn slope_at(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    if n == 2 {
        return (y[1] - y[0]) / (x[1] - x[0]);
    }
    let one_sided = |j0: usize, j1: usize, j2: usize| {
        let (h1, h2) = (x[j1] - x[j0], x[j2] - x[j1]);
        -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y[j0] + (h1 + h2) / (h1 * h2) * y[j1]
            - h1 / (h2 * (h1 + h2)) * y[j2]
    };
    match i {
        0 => one_sided(0, 1, 2),
        i if i == n - 1 => one_sided(n - 1, n - 2, n - 3),
        i => (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]),
    }
}

/// Maps a posterior over future births onto calendar years.
pub fn extinction_curve(
    posterior: &TabulatedPosterior,
    model: &BirthRateModel,
    range: &YearRange,
) -> Result<ForecastCurve> {
    model.validate()?;
    if posterior.variable() != Variable::FutureCount {
        return Err(Error::Precondition("extinction curves need a posterior over future births".into()));
    }
    let years = range.years();
    let p = years
        .iter()
        .map(|&y| model.births_to_year(y).map(|b| posterior.cdf_at(b)))
        .collect::<Result<Vec<_>>>()?;
    ForecastCurve::from_probabilities(years, p)
}

/// `P(t) = 1 - (1 - h)^(t - epoch)` for a fixed annual probability `h`.
pub fn constant_hazard_curve(h: f64, model: &BirthRateModel, range: &YearRange) -> Result<ForecastCurve> {
    model.validate()?;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("annual hazard must lie in (0, 1), got {h}")));
    }
    let years = range.years();
    let p = years
        .iter()
        .map(|&y| model.births_to_year(y).map(|b| 1.0 - (1.0 - h).powf(b / model.rate)))
        .collect::<Result<Vec<_>>>()?;
    ForecastCurve::from_probabilities(years, p)
}

/// Posterior over future births for `rank`, mapped onto `range`.
pub fn doomsday_curve(
    rank: &RankPrior,
    model: &BirthRateModel,
    range: &YearRange,
    grid: &GridSpec,
) -> Result<ForecastCurve> {
    extinction_curve(&future_count_posterior(rank, grid)?, model, range)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianYear {
    Year(f64),
    /// The curve stays below one half over its whole range.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Milestones {
    pub median_year: MedianYear,
    pub final_year: f64,
    pub p_final: f64,
}

/// Year at which the curve crosses one half, by linear interpolation.
pub fn milestones(curve: &ForecastCurve) -> Milestones {
    let (y, p) = (&curve.years, &curve.p_extinct);
    let i = p.partition_point(|&v| v < 0.5);
    let median_year = if i == p.len() {
        MedianYear::Unbounded
    } else if i == 0 {
        MedianYear::Year(y[0])
    } else {
        MedianYear::Year(y[i - 1] + (0.5 - p[i - 1]) / (p[i] - p[i - 1]) * (y[i] - y[i - 1]))
    };
    Milestones {
        median_year,
        final_year: y[y.len() - 1],
        p_final: p[p.len() - 1],
    }
}

/// Least-squares fit of `1 - (1 - h)^(t - t0)` to the curve on
/// `[start, end]`, where `t0` is the first year in the window.
pub fn hazard_fit_window(curve: &ForecastCurve, start: f64, end: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .years
        .iter()
        .zip(&curve.p_extinct)
        .filter(|(y, _)| (start..=end).contains(*y))
        .map(|(&y, &p)| (y, p))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Precondition(format!(
            "fit window [{start}, {end}] holds fewer than two curve points"
        )));
    }
    let t0 = pts[0].0;
    let p0 = pts[0].1;
    if pts.iter().all(|&(_, p)| p == p0) {
        return Ok(0.0);
    }
    // Derivative of the squared residual sum with respect to h.
    let slope = |h: f64| -> f64 {
        pts.iter()
            .map(|&(y, p)| {
                let dt = y - t0;
                let model = 1.0 - (1.0 - h).powf(dt);
                2.0 * (model - (p - p0)) * dt * (1.0 - h).powf(dt - 1.0)
            })
            .sum()
    };
    bisect(slope, 0.0, 1.0 - 1e-9, Bisection::default())
}

/// Column name for a baseline hazard: `0.002` becomes `p_h0002`.
pub fn baseline_column(h: f64) -> String {
    format!("p_h{}", h.to_string().replace('.', ""))
}

fn check_hazards(hazards: &[f64]) -> Result<()> {
    match hazards.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
        Some(h) => Err(Error::InvalidParameter(format!("annual hazard must lie in (0, 1), got {h}"))),
        None => Ok(()),
    }
}

/// CSV over calendar years: the Doomsday curve, one constant-hazard
/// baseline per entry of `hazards` and the Doomsday hazard.
pub fn time_table_csv(doomsday: &ForecastCurve, model: &BirthRateModel, hazards: &[f64]) -> Result<String> {
    check_hazards(hazards)?;
    let years = doomsday.years();
    let base = hazards
        .iter()
        .map(|&h| {
            years
                .iter()
                .map(|&y| model.births_to_year(y).map(|b| 1.0 - (1.0 - h).powf(b / model.rate)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::from("year,p_doomsday");
    for &h in hazards {
        let _ = write!(out, ",{}", baseline_column(h));
    }
    out.push_str(",hazard_doomsday\n");
    for i in 0..years.len() {
        let _ = write!(out, "{},{:e}", years[i], doomsday.p_extinct[i]);
        for b in &base {
            let _ = write!(out, ",{:e}", b[i]);
        }
        let _ = writeln!(out, ",{:e}", doomsday.hazard[i]);
    }
    Ok(out)
}

/// CSV over cumulative future births: the posterior CDF and the
/// constant-hazard baselines transposed through the birth rate.
pub fn births_table_csv(
    posterior: &TabulatedPosterior,
    model: &BirthRateModel,
    births: &[f64],
    hazards: &[f64],
) -> Result<String> {
    model.validate()?;
    check_hazards(hazards)?;
    if posterior.variable() != Variable::FutureCount {
        return Err(Error::Precondition("births table needs a posterior over future births".into()));
    }
    let mut out = String::from("births,p_doomsday");
    for &h in hazards {
        let _ = write!(out, ",{}", baseline_column(h));
    }
    out.push('\n');
    for &b in births {
        if !(b >= 0.0) {
            return Err(Error::InvalidParameter(format!("births must be nonnegative, got {b}")));
        }
        let _ = write!(out, "{b:e},{:e}", posterior.cdf_at(b));
        for &h in hazards {
            let _ = write!(out, ",{:e}", 1.0 - (1.0 - h).powf(b / model.rate));
        }
        out.push('\n');
    }
    Ok(out)
}
