//! Fixed-grid composite trapezoid rules.

use crate::{Error, Real, Result};

/// Default number of trapezoid intervals for spectral quadrature.
pub const QUADRATURE_NODES: usize = 8192;

/// Composite trapezoid rule of `f` over `[lo, hi]` with `intervals` panels.
pub fn trapezoid<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, intervals: usize) -> T {
    assert!(intervals > 0);
    let h = (hi - lo) / T::from_usize_lossy(intervals);
    let mut sum = (f(lo) + f(hi)) * T::lit(0.5);
    for i in 1..intervals {
        sum = sum + f(lo + h * T::from_usize_lossy(i));
    }
    sum * h
}

/// Result of a trapezoid rule checked against one doubling of the node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked<T> {
    /// Value at the doubled resolution.
    pub value: T,
    /// |value(2n) - value(n)|.
    pub change: T,
}

/// Trapezoid rule at `intervals` and `2·intervals`; fails if the two differ
/// by more than `tolerance`.
pub fn trapezoid_checked<T: Real, F: Fn(T) -> T>(
    f: F,
    lo: T,
    hi: T,
    intervals: usize,
    tolerance: T,
    context: &'static str,
) -> Result<Checked<T>> {
    let coarse = trapezoid(&f, lo, hi, intervals);
    let h = (hi - lo) / T::from_usize_lossy(intervals);
    let half = h * T::lit(0.5);
    let mut mid = T::zero();
    for i in 0..intervals {
        mid = mid + f(lo + half + h * T::from_usize_lossy(i));
    }
    let fine = coarse * T::lit(0.5) + mid * half;
    let change = (fine - coarse).abs();
    if !(change <= tolerance) {
        return Err(Error::numerical(
            context,
            format!("node doubling changed the integral by {change:e} (tolerance {tolerance:e})"),
        ));
    }
    Ok(Checked {
        value: fine,
        change,
    })
}

/// Trapezoid weights over tabulated uniform samples with spacing `step`.
pub fn trapezoid_samples<T: Real>(values: &[T], step: T) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        n => {
            let inner: T = values[1..n - 1].iter().copied().sum();
            (inner + (values[0] + values[n - 1]) * T::lit(0.5)) * step
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_for_linear() {
        assert_relative_eq!(trapezoid(|x: f64| 2.0 * x + 1.0, 0.0, 3.0, 7), 12.0, epsilon = 1e-12);
    }

    #[test]
    fn doubling_reports_change() {
        let c = trapezoid_checked(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 64, 1e-3, "t").unwrap();
        assert_relative_eq!(c.value, 2.0, epsilon = 2e-4);
        assert!(c.change > 0.0);
        assert!(trapezoid_checked(|x: f64| x.sin(), 0.0, 3.0, 2, 1e-12, "t").is_err());
    }

    #[test]
    fn samples_rule() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_relative_eq!(trapezoid_samples(&v, 1.0f64), 4.5);
    }
}
