//! One-dimensional minimisation: coarse grid, then golden-section refinement.

use crate::scalar::Scalar;

const MAX_GOLDEN_ITER: usize = 200;

/// Golden-section search for a minimum of `f` on `[a, b]`. Returns `(x, f(x))`.
///
/// Stops when the bracket is narrower than `rel_tol` relative to its midpoint,
/// or when it no longer shrinks in floating point.
pub fn golden_section<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, rel_tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_GOLDEN_ITER {
        let width = b - a;
        let mid = (a + b) / T::lit(2.0);
        if width <= rel_tol * mid.abs().max(T::min_positive_value()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        if !(b - a < width) {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimum of `f` over `[lo, hi]`: evaluates `points` grid nodes (log-spaced
/// when `log_spaced`, which needs `lo > 0`), then refines the best node's
/// neighbourhood by golden section.
pub fn grid_then_golden<T: Scalar>(
    f: impl Fn(T) -> T,
    lo: T,
    hi: T,
    points: usize,
    log_spaced: bool,
    rel_tol: T,
) -> (T, T) {
    assert!(points >= 3 && hi > lo);
    let steps = T::from_count(points as u64 - 1);
    let node = |k: usize| -> T {
        let t = T::from_count(k as u64) / steps;
        if k + 1 == points {
            hi
        } else if log_spaced {
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        } else {
            lo + t * (hi - lo)
        }
    };
    let mut best = (0, T::infinity());
    for k in 0..points {
        let v = f(node(k));
        if v < best.1 {
            best = (k, v);
        }
    }
    let (k, grid_val) = best;
    let a = node(k.saturating_sub(1));
    let b = node((k + 1).min(points - 1));
    let (x, v) = golden_section(&f, a, b, rel_tol);
    if v <= grid_val {
        (x, v)
    } else {
        (node(k), grid_val)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let (x, v) = golden_section(|x: f64| (x - 1.3).powi(2) + 2.0, -4.0, 9.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn grid_escapes_local_minimum() {
        // local minimum near 0.5, global near 4
        let f = |x: f64| (x - 0.5).powi(2) * (x - 4.0).powi(2) - 0.1 * x;
        let (x, _) = grid_then_golden(f, 0.01, 10.0, 64, true, 1e-12);
        assert!((x - 4.0).abs() < 0.1, "{x}");
    }

    #[test]
    fn boundary_minimum() {
        let (x, v) = grid_then_golden(|x: f64| x, 1.0, 5.0, 16, false, 1e-12);
        assert!((x - 1.0).abs() < 1e-9 && (v - 1.0).abs() < 1e-9);
    }
}
