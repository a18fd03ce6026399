//! Frequentist counterparts of the rank posterior.

use num_rational::Ratio;

use crate::error::{Error, Result};

/// `N̂ = 2r - 1`.
pub fn frequentist_estimate(r: u64) -> Result<u64> {
    if r == 0 {
        return Err(Error::InvalidParameter("rank must be >= 1".into()));
    }
    r.checked_mul(2)
        .map(|x| x - 1)
        .ok_or_else(|| Error::InvalidParameter(format!("2r - 1 overflows for r = {r}")))
}

/// `E[N̂]` with `r` uniform on `1..=n`, summed term by term.
pub fn unbiasedness_check(n: u64) -> Result<Ratio<u128>> {
    if n == 0 {
        return Err(Error::InvalidParameter("group size must be >= 1".into()));
    }
    let sum: u128 = (1..=n as u128).map(|r| 2 * r - 1).sum();
    Ok(Ratio::new(sum, n as u128))
}

/// Fraction of ranks `r ∈ 1..=n` whose `q`-credible upper bound
/// `(r - ½) / (1 - q)` is at least `n`.
pub fn coverage_check(n: u64, q: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("group size must be >= 1".into()));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence must lie in (0, 1), got {q}")));
    }
    let covered = (1..=n).filter(|&r| (r as f64 - 0.5) / (1.0 - q) >= n as f64).count();
    Ok(covered as f64 / n as f64)
}

/// Mass that an observer-weighted `1/N` prior on `[1, n_max]` puts on
/// `[n_max / 100, n_max]`. The weighted prior is flat, so this is a ratio
/// of lengths.
pub fn sia_truncation_demo(n_max: f64) -> Result<f64> {
    if !(n_max.is_finite() && n_max > 1.0) {
        return Err(Error::InvalidParameter(format!("n_max must exceed 1, got {n_max}")));
    }
    let lo = (n_max / 100.0).max(1.0);
    Ok((n_max - lo) / (n_max - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_examples() {
        assert_eq!(frequentist_estimate(1).unwrap(), 1);
        assert_eq!(frequentist_estimate(3).unwrap(), 5);
        assert_eq!(frequentist_estimate(100_000_000_000).unwrap(), 199_999_999_999);
        assert!(frequentist_estimate(0).is_err());
        assert!(frequentist_estimate(u64::MAX).is_err());
    }

    #[test]
    fn unbiased_examples() {
        assert_eq!(unbiasedness_check(1).unwrap(), Ratio::from_integer(1));
        assert_eq!(unbiasedness_check(4).unwrap(), Ratio::from_integer(4));
        assert_eq!(unbiasedness_check(10_000).unwrap(), Ratio::from_integer(10_000));
    }

    #[test]
    fn coverage_examples() {
        let c = coverage_check(10_000, 0.95).unwrap();
        assert!((0.945..=0.955).contains(&c));
        assert_eq!(coverage_check(1, 0.6).unwrap(), 1.0);
        assert_eq!(coverage_check(1, 0.4).unwrap(), 0.0);
        assert!(coverage_check(1000, 0.999999).unwrap() > 0.999);
        assert!(coverage_check(10, 1.0).is_err());
    }

    #[test]
    fn sia_examples() {
        assert!((sia_truncation_demo(1e100).unwrap() - 0.99).abs() < 1e-12);
        assert_eq!(sia_truncation_demo(100.0).unwrap(), 1.0);
        assert!((sia_truncation_demo(1e4).unwrap() - 0.9901).abs() < 1e-4);
        assert!(sia_truncation_demo(1.0).is_err());
    }
}
