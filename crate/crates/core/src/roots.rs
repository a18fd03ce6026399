//! Bracketed root finding.

use crate::error::{Error, Result};

/// Stopping rule for [`bisect`].
#[derive(Debug, Clone, Copy)]
pub struct Bisection {
    pub max_iterations: usize,
    /// Stop once the bracket is narrower than `x_tol * max(1, |x|)`.
    pub x_tol: f64,
}

impl Default for Bisection {
    fn default() -> Self {
        Bisection {
            max_iterations: 200,
            x_tol: 1e-15,
        }
    }
}

/// Bisection on `[lo, hi]`. The endpoints must bracket a sign change of `f`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, opts: Bisection) -> Result<f64> {
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
        )));
    }
    for _ in 0..opts.max_iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= opts.x_tol * mid.abs().max(1.0) {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, Bisection::default()).unwrap();
        assert!((x - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn endpoint_root() {
        assert_eq!(bisect(|x| x - 1.0, 1.0, 3.0, Bisection::default()).unwrap(), 1.0);
    }

    #[test]
    fn swapped_bracket() {
        let x = bisect(|x| x.ln(), 10.0, 0.1, Bisection::default()).unwrap();
        assert!((x - 1.0).abs() < 1e-14);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, Bisection::default()),
            Err(Error::NoRoot(_))
        ));
    }
}
