//! Binary entropy and helpers.

use crate::error::{Error, Result};

/// Binary entropy in bits. Endpoints return exactly 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "binary entropy argument {x} not in [0, 1]"
        )));
    }
    Ok(h(x))
}

/// Unchecked binary entropy; arguments are clamped into [0, 1].
pub fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Derivative of `h`, `log2((1 - x) / x)`. Infinite at 0.
pub fn h_prime(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x >= 1.0 {
        return f64::NEG_INFINITY;
    }
    ((1.0 - x) / x).log2()
}

/// Entropy of a phase-error rate with the cap used throughout: `h(x)` up to
/// 1/2 and 1 beyond.
pub fn h_capped(x: f64) -> f64 {
    if x <= 0.5 {
        h(x)
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::bisect;

    #[test]
    fn endpoints_and_midpoint() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(binary_entropy(-0.1), Err(Error::OutOfRange(_))));
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn half_bit_point() {
        // independent root of h(x) = 1/2 on (0, 1/2)
        let root = bisect(|x| h(x) - 0.5, 1e-6, 0.5, 1e-15).unwrap();
        assert!((root - 0.110_028).abs() < 1e-6);
        assert!((h(0.11) - 0.5).abs() < 1e-4);
        assert!((h(0.11) - 0.499_915_8).abs() < 1e-6);
    }

    #[test]
    fn derivative_matches_difference() {
        for x in [0.01, 0.1, 0.3, 0.49] {
            let fd = (h(x + 1e-7) - h(x - 1e-7)) / 2e-7;
            assert!((fd - h_prime(x)).abs() < 1e-6);
        }
    }
}
