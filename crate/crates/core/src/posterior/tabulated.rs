use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum;

/// Which quantity a tabulated posterior is over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variable {
    /// Total group size.
    #[serde(rename = "N")]
    GroupSize,
    /// Future births, `N - r`.
    #[serde(rename = "B")]
    FutureCount,
}

impl Variable {
    pub fn label(&self) -> &'static str {
        match self {
            Variable::GroupSize => "N",
            Variable::FutureCount => "B",
        }
    }
}

/// Layout of the tabulation grid.
///
/// Posteriors over `N` start at the edge of their support and extend
/// `decades_above` decades beyond it. Posteriors over `B` start with a node
/// at zero followed by log-spaced nodes from `decades_below` decades under
/// the smallest rank to `decades_above` decades over the largest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub decades_above: f64,
    pub decades_below: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 4096,
            decades_above: 6.0,
            decades_below: 6.0,
        }
    }
}

impl GridSpec {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.points < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 points, got {}",
                self.points
            )));
        }
        if !(self.decades_above > 0.0 && self.decades_below >= 0.0) {
            return Err(Error::InvalidParameter("grid spans must be positive".into()));
        }
        Ok(())
    }

    /// `points` log-spaced nodes from `lo` to `lo · 10^decades_above`, with
    /// the node nearest `2 lo` moved onto it so that the median of `lo / N²`
    /// is a node.
    pub(crate) fn above(&self, lo: f64) -> Vec<f64> {
        let mut g = log_space(lo, lo * 10f64.powf(self.decades_above), self.points);
        let target = 2.0 * lo;
        let i = g.partition_point(|&x| x < target);
        if i > 0 && i < g.len() - 1 {
            let j = if target - g[i - 1] < g[i] - target { i - 1 } else { i };
            if j > 0 {
                g[j] = target;
            }
        }
        g
    }

    /// Zero followed by `points - 1` log-spaced nodes.
    pub(crate) fn around(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.points);
        g.push(0.0);
        g.extend(log_space(
            lo * 10f64.powf(-self.decades_below),
            hi * 10f64.powf(self.decades_above),
            self.points - 1,
        ));
        g
    }
}

pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + step * i as f64).exp(),
        })
        .collect()
}

/// Trapezoid mass of one cell: in `ln x` for cells away from zero, linear
/// in `x` for a cell starting at zero.
fn cell_mass(x0: f64, x1: f64, p0: f64, p1: f64) -> f64 {
    if x0 > 0.0 {
        0.5 * (x0 * p0 + x1 * p1) * (x1 / x0).ln()
    } else {
        0.5 * (p0 + p1) * (x1 - x0)
    }
}

/// Summary statistics carried in the JSON header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub variable: Variable,
    pub normalization: f64,
    pub tail_mass: f64,
    pub median: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

/// A normalized density and CDF on a strictly increasing grid, plus the
/// probability mass beyond the last node. Past the grid the density is
/// taken to fall as a power law `x^-tail_exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPosterior {
    variable: Variable,
    grid: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
    tail_mass: f64,
    tail_exponent: f64,
}

impl TabulatedPosterior {
    /// Normalize an unnormalized density by the trapezoid rule plus a power-law
    /// tail fitted to the last two nodes; the CDF is the running trapezoid sum.
    pub fn from_density(variable: Variable, grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        check_grid(&grid, &density)?;
        let n = grid.len();
        let (xa, xb) = (grid[n - 2], grid[n - 1]);
        let (pa, pb) = (density[n - 2], density[n - 1]);
        let (tail_exponent, raw_tail) = if pb == 0.0 {
            (2.0, 0.0)
        } else {
            let k = (pa / pb).ln() / (xb / xa).ln();
            if !(k > 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "density tail decays too slowly to normalize (exponent {k})"
                )));
            }
            (k, xb * pb / (k - 1.0))
        };
        let cells: Vec<f64> = (1..n)
            .map(|i| cell_mass(grid[i - 1], grid[i], density[i - 1], density[i]))
            .collect();
        let total = pairwise_sum(&cells) + raw_tail;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "density has non-positive or non-finite mass {total}"
            )));
        }
        let density: Vec<f64> = density.iter().map(|p| p / total).collect();
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        cdf.push(0.0);
        for c in &cells {
            acc += c / total;
            cdf.push(acc);
        }
        Ok(TabulatedPosterior {
            variable,
            grid,
            density,
            cdf,
            tail_mass: raw_tail / total,
            tail_exponent,
        })
    }

    /// Assemble from an already-normalized density and its exact CDF.
    pub fn from_parts(
        variable: Variable,
        grid: Vec<f64>,
        density: Vec<f64>,
        cdf: Vec<f64>,
        tail_mass: f64,
        tail_exponent: f64,
    ) -> Result<Self> {
        check_grid(&grid, &density)?;
        if cdf.len() != grid.len() || cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("cdf must be nondecreasing and match the grid".into()));
        }
        if !(tail_exponent > 1.0) || !(0.0..=1.0).contains(&tail_mass) {
            return Err(Error::InvalidParameter("invalid tail model".into()));
        }
        Ok(TabulatedPosterior {
            variable,
            grid,
            density,
            cdf,
            tail_mass,
            tail_exponent,
        })
    }

    pub fn variable(&self) -> Variable {
        self.variable
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Probability beyond the last grid node.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Trapezoid integral of the tabulated density plus the tail mass.
    pub fn normalization(&self) -> f64 {
        let cells: Vec<f64> = (1..self.grid.len())
            .map(|i| cell_mass(self.grid[i - 1], self.grid[i], self.density[i - 1], self.density[i]))
            .collect();
        pairwise_sum(&cells) + self.tail_mass
    }

    /// Largest gap between the stored CDF and the running trapezoid sum.
    pub fn cdf_consistency(&self) -> f64 {
        let mut acc = self.cdf[0];
        let mut worst = 0.0f64;
        for i in 1..self.grid.len() {
            acc += cell_mass(self.grid[i - 1], self.grid[i], self.density[i - 1], self.density[i]);
            worst = worst.max((acc - self.cdf[i]).abs());
        }
        worst.max((self.cdf[self.cdf.len() - 1] + self.tail_mass - 1.0).abs())
    }

    fn last(&self) -> usize {
        self.grid.len() - 1
    }

    /// Fraction of a cell's mass lying in `[x0, x]`, assuming a power law
    /// through the two endpoint densities (linear when that is undefined).
    fn cell_fraction(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (p0, p1) = (self.density[i], self.density[i + 1]);
        if x0 > 0.0 && p0 > 0.0 && p1 > 0.0 {
            let k = (p0 / p1).ln() / (x1 / x0).ln();
            let shape = |s: f64| {
                let a = (1.0 - k) * s;
                if a.abs() < 1e-12 {
                    s
                } else {
                    a.exp_m1() / (1.0 - k)
                }
            };
            shape((x / x0).ln()) / shape((x1 / x0).ln())
        } else {
            let t = (x - x0) / (x1 - x0);
            let px = p0 + t * (p1 - p0);
            let full = p0 + p1;
            if full == 0.0 {
                t
            } else {
                t * (p0 + px) / full
            }
        }
    }

    /// Posterior CDF at `x`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let last = self.last();
        if x <= self.grid[0] {
            return if x < self.grid[0] { 0.0 } else { self.cdf[0] };
        }
        if x >= self.grid[last] {
            let s = (self.grid[last] / x).powf(self.tail_exponent - 1.0);
            return 1.0 - self.tail_mass * s;
        }
        let i = self.grid.partition_point(|&g| g <= x) - 1;
        let f = self.cell_fraction(i, x);
        self.cdf[i] + f * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Posterior quantile.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter(format!("quantile level {q} outside [0, 1]")));
        }
        let last = self.last();
        if q <= self.cdf[0] {
            return Ok(self.grid[0]);
        }
        if q >= self.cdf[last] {
            if q >= 1.0 {
                return Ok(f64::INFINITY);
            }
            let ratio = self.tail_mass / (1.0 - q);
            return Ok(self.grid[last] * ratio.powf(1.0 / (self.tail_exponent - 1.0)));
        }
        let i = (self.cdf.partition_point(|&c| c < q) - 1).min(last - 1);
        if q == self.cdf[i + 1] {
            return Ok(self.grid[i + 1]);
        }
        let span = self.cdf[i + 1] - self.cdf[i];
        if span <= 0.0 {
            return Ok(self.grid[i]);
        }
        let want = (q - self.cdf[i]) / span;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (p0, p1) = (self.density[i], self.density[i + 1]);
        if x0 > 0.0 && p0 > 0.0 && p1 > 0.0 {
            let k = (p0 / p1).ln() / (x1 / x0).ln();
            let l = (x1 / x0).ln();
            let a = 1.0 - k;
            let s = if (a * l).abs() < 1e-12 {
                want * l
            } else {
                (want * (a * l).exp_m1()).ln_1p() / a
            };
            return Ok(x0 * s.exp());
        }
        let (mut lo, mut hi) = (x0, x1);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cell_fraction(i, mid) < want {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid level")
    }

    pub fn summary(&self) -> Summary {
        let q = |p| self.quantile(p).expect("valid level");
        Summary {
            variable: self.variable,
            normalization: self.normalization(),
            tail_mass: self.tail_mass,
            median: q(0.5),
            q05: q(0.05),
            q50: q(0.5),
            q95: q(0.95),
        }
    }

    /// Largest pointwise gap between two posteriors on the same grid, with
    /// densities multiplied by `scale` (e.g. the rank, to measure in units
    /// of `x / r`).
    pub fn sup_distance(&self, other: &TabulatedPosterior, scale: f64) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Precondition("posteriors are tabulated on different grids".into()));
        }
        Ok(self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs() * scale)
            .fold(0.0, f64::max))
    }

    /// Two-column CSV preceded by a `#`-prefixed JSON summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.grid.len() * 40);
        let header = serde_json::to_string(&self.summary()).expect("summary serializes");
        let _ = writeln!(out, "# {header}");
        let _ = writeln!(out, "{},density", self.variable.label());
        for (x, p) in self.grid.iter().zip(&self.density) {
            let _ = writeln!(out, "{x:e},{p:e}");
        }
        out
    }
}

fn check_grid(grid: &[f64], density: &[f64]) -> Result<()> {
    if grid.len() < 3 || grid.len() != density.len() {
        return Err(Error::InvalidParameter("grid and density must have equal length >= 3".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return Err(Error::InvalidParameter("grid must be nonnegative and strictly increasing".into()));
    }
    if density.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidParameter("density must be finite and nonnegative".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inverse_square(lo: f64) -> TabulatedPosterior {
        let grid = GridSpec::default().above(lo);
        let density = grid.iter().map(|x| 1.0 / (x * x)).collect();
        TabulatedPosterior::from_density(Variable::GroupSize, grid, density).unwrap()
    }

    #[test]
    fn normalizes_power_law() {
        let t = inverse_square(3.0);
        assert!((t.normalization() - 1.0).abs() < 1e-12);
        assert!((t.tail_exponent - 2.0).abs() < 1e-9);
        assert!(t.cdf_consistency() < 1e-12);
        // median of 3/x² on [3, ∞) is 6
        assert!((t.median() - 6.0).abs() < 1e-4);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let t = inverse_square(1.0);
        for &q in &[0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 0.9999995] {
            let x = t.quantile(q).unwrap();
            assert!((t.cdf_at(x) - q).abs() < 1e-12, "q = {q}");
        }
        assert_eq!(t.quantile(1.0).unwrap(), f64::INFINITY);
        assert!(t.quantile(1.1).is_err());
    }

    #[test]
    fn cdf_outside_grid() {
        let t = inverse_square(2.0);
        assert_eq!(t.cdf_at(1.0), 0.0);
        assert!(t.cdf_at(1e300) > 1.0 - 1e-12);
    }

    #[test]
    fn zero_node_cell_is_linear() {
        let grid = vec![0.0, 1.0, 2.0, 4.0];
        let density = vec![1.0, 1.0, 0.25, 1.0 / 16.0];
        let t = TabulatedPosterior::from_density(Variable::FutureCount, grid, density).unwrap();
        assert!((t.normalization() - 1.0).abs() < 1e-12);
        let half_cell = t.cdf_at(0.5);
        assert!((half_cell - 0.5 * t.cdf()[1]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(TabulatedPosterior::from_density(Variable::GroupSize, vec![1.0, 2.0], vec![1.0, 1.0]).is_err());
        assert!(
            TabulatedPosterior::from_density(Variable::GroupSize, vec![1.0, 1.0, 2.0], vec![1.0; 3]).is_err()
        );
        // tail too heavy to normalize
        let grid = vec![1.0, 2.0, 4.0];
        let density = grid.iter().map(|x: &f64| x.powf(-0.5)).collect();
        assert!(TabulatedPosterior::from_density(Variable::GroupSize, grid, density).is_err());
    }

    #[test]
    fn csv_has_summary_header() {
        let t = inverse_square(1.0);
        let csv = t.to_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("# {"));
        let v: serde_json::Value = serde_json::from_str(&header[2..]).unwrap();
        assert!((v["median"].as_f64().unwrap() - 2.0).abs() < 1e-4);
        assert_eq!(v["variable"], "N");
        assert_eq!(lines.next().unwrap(), "N,density");
        assert_eq!(lines.count(), 4096);
    }
}
