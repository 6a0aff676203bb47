//! Scalar quadrature: adaptive Simpson with error-controlled bisection.

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// `tol` is an absolute error target for the whole interval; it is split
/// between subintervals in the usual way, so the final error is comparable
/// to `tol`. Recursion stops at a depth of 60 subdivisions.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, m, b, fa, fm, fb, whole, tol, 60)
}

/// Adaptive Simpson driven by a relative tolerance: a first pass estimates
/// the integral's magnitude, which then scales the absolute target.
pub(crate) fn adaptive_simpson_rel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    // Coarse composite pass to get the scale; 32 panels are enough for the
    // smooth decaying integrands used in this crate.
    let panels = 32;
    let h = (b - a) / panels as f64;
    let mut scale = 0.0;
    for k in 0..panels {
        let x0 = a + k as f64 * h;
        scale += simpson(f(x0).abs(), f(x0 + 0.5 * h).abs(), f(x0 + h).abs(), h);
    }
    adaptive_simpson(f, a, b, rel_tol * scale.max(f64::MIN_POSITIVE))
}

#[inline]
fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Trapezoid rule over tabulated nodes `(x_i, y_i)`; the nodes need not be
/// uniformly spaced but must be sorted by `x`.
pub(crate) fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{exp, ln};

    #[test]
    fn simpson_integrates_exponential_tail() {
        let v = adaptive_simpson(&|x| exp(-x), 0.0, 200.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-11, "got {v}");
    }

    #[test]
    fn simpson_rel_integrates_log() {
        // ∫_1^2 ln(x) dx = 2 ln 2 - 1
        let v = adaptive_simpson_rel(&|x| ln(x), 1.0, 2.0, 1e-12);
        let want = 2.0 * ln(2.0) - 1.0;
        assert!((v - want).abs() < 1e-11);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let xs = [0.0, 0.3, 1.0, 2.0];
        let ys: std::vec::Vec<f64> = xs.iter().map(|&x| 3.0 * x + 1.0).collect();
        let v = trapezoid(&xs, &ys);
        assert!((v - 8.0).abs() < 1e-14);
    }
}
