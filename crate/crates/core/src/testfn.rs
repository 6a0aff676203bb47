//! Compactly supported bump test functions and their closed-form
//! derivatives: the spatial bump `φ`, the temporal cutoff `η`, the rescaled
//! space-time cutoff `ψ_{τ,R}(t,x) = η(t/τ) φ(x/R)`, empirical verification
//! of the derivative bounds `|Δφ| ≤ C φ^{1/p}`, `|η'|, |η''| ≤ C η^{1/p}`,
//! and the elementary Young-type gap.

use crate::math::{exp, powf};
use alloc::vec::Vec;

/// Below this value of `1 - s^2` (resp. `t^2 - 1/4`, `1 - t^2`) the bump
/// factor underflows to an exact zero, so values and all derivatives are
/// returned as 0 before any polynomial prefactor can overflow to infinity.
const SUPPORT_FLOOR: f64 = 1.4e-3;

/// Radial bump profile `φ(s) = exp(-1/(1-s^2))` for `s = |x| < 1`, else 0.
pub fn phi(s: f64) -> f64 {
    let s = s.abs();
    let u = 1.0 - s * s;
    if u <= SUPPORT_FLOOR {
        return 0.0;
    }
    exp(-1.0 / u)
}

/// Radial derivative `dφ/ds = -2s (1-s^2)^{-2} φ(s)`; the gradient of
/// `φ(|x|)` is this value times the unit radial vector.
pub fn grad_phi(s: f64) -> f64 {
    let sa = s.abs();
    let u = 1.0 - sa * sa;
    if u <= SUPPORT_FLOOR {
        return 0.0;
    }
    let sign = if s < 0.0 { -1.0 } else { 1.0 };
    sign * (-2.0 * sa) / (u * u) * exp(-1.0 / u)
}

/// Laplacian of `x ↦ φ(|x|)` in `R^n`, evaluated at radius `s`.
///
/// With `h(s) = -2s(1-s^2)^{-2}` (so `φ' = hφ`),
/// `Δφ = (h' + h^2 + (n-1) h/s) φ`; at `s = 0` the limit `h/s → -2` gives
/// `Δφ(0) = -2n e^{-1}`.
pub fn laplacian_phi(n: u32, s: f64) -> f64 {
    let s = s.abs();
    let u = 1.0 - s * s;
    if u <= SUPPORT_FLOOR {
        return 0.0;
    }
    let iu2 = 1.0 / (u * u);
    let h = -2.0 * s * iu2;
    let h_prime = -2.0 * iu2 - 8.0 * s * s * iu2 / u;
    let h_over_s = -2.0 * iu2;
    let nf = n as f64;
    (h_prime + h * h + (nf - 1.0) * h_over_s) * exp(-1.0 / u)
}

#[derive(Clone, Copy)]
struct EtaParts {
    /// `a = exp(-1/(t^2 - 1/4))` and its first two log-derivative data.
    a: f64,
    a1: f64,
    a2: f64,
    /// `b = exp(-1/(1 - t^2))` likewise.
    b: f64,
    b1: f64,
    b2: f64,
}

/// Shared transition-zone factors of η on (1/2, 1). Outside the numerically
/// meaningful part of the transition the caller returns plateau values.
fn eta_parts(t: f64) -> Option<EtaParts> {
    let ua = t * t - 0.25;
    let ub = 1.0 - t * t;
    if ua <= SUPPORT_FLOOR || ub <= SUPPORT_FLOOR {
        return None;
    }
    // log-derivatives: a = e^{la}, la = -1/ua; a1 = la', a2 = la''.
    let a = exp(-1.0 / ua);
    let a1 = 2.0 * t / (ua * ua);
    let a2 = 2.0 / (ua * ua) - 8.0 * t * t / (ua * ua * ua);
    let b = exp(-1.0 / ub);
    let b1 = -2.0 * t / (ub * ub);
    let b2 = -2.0 / (ub * ub) - 8.0 * t * t / (ub * ub * ub);
    Some(EtaParts {
        a,
        a1,
        a2,
        b,
        b1,
        b2,
    })
}

/// Temporal cutoff: `η ≡ 1` on `[0, 1/2]`, `η ≡ 0` on `[1, ∞)`, and the
/// smooth partition `e^{-1/(1-t^2)} / (e^{-1/(t^2-1/4)} + e^{-1/(1-t^2)})`
/// in between.
pub fn eta(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    match eta_parts(t) {
        None => {
            if t < 0.75 {
                1.0
            } else {
                0.0
            }
        }
        Some(p) => p.b / (p.a + p.b),
    }
}

/// `η'(t)`; identically 0 on the plateaus.
pub fn eta_prime(t: f64) -> f64 {
    if t <= 0.5 || t >= 1.0 {
        return 0.0;
    }
    match eta_parts(t) {
        None => 0.0,
        Some(p) => {
            let s = p.a + p.b;
            // η' = (b1 - a1) a b / s^2  with a1, b1 the log-derivatives.
            (p.b1 - p.a1) * p.a * p.b / (s * s)
        }
    }
}

/// `η''(t)`; identically 0 on the plateaus.
pub fn eta_double_prime(t: f64) -> f64 {
    if t <= 0.5 || t >= 1.0 {
        return 0.0;
    }
    match eta_parts(t) {
        None => 0.0,
        Some(p) => {
            let s = p.a + p.b;
            let d1 = p.b1 - p.a1;
            let d2 = p.b2 - p.a2;
            // N = d1 a b; η' = N / s^2;
            // η'' = [ (d2 + d1 (a1 + b1)) s - 2 d1 (a1 a + b1 b) ] a b / s^3.
            let numer = (d2 + d1 * (p.a1 + p.b1)) * s - 2.0 * d1 * (p.a1 * p.a + p.b1 * p.b);
            numer * p.a * p.b / (s * s * s)
        }
    }
}

/// The rescaled space-time cutoff `ψ_{τ,R}(t, x) = η(t/τ) φ(|x|/R)` with its
/// closed-form derivatives.
#[derive(Debug, Clone, Copy)]
pub struct SpaceTimeCutoff {
    pub tau: f64,
    pub radius: f64,
    pub n: u32,
}

impl SpaceTimeCutoff {
    pub fn new(tau: f64, radius: f64, n: u32) -> Self {
        assert!(tau > 0.0 && radius > 0.0 && n >= 1);
        Self { tau, radius, n }
    }

    pub fn value(&self, t: f64, r: f64) -> f64 {
        eta(t / self.tau) * phi(r / self.radius)
    }

    /// `∂_t ψ = τ^{-1} η'(t/τ) φ(|x|/R)`.
    pub fn dt(&self, t: f64, r: f64) -> f64 {
        eta_prime(t / self.tau) / self.tau * phi(r / self.radius)
    }

    /// `∂_t^2 ψ = τ^{-2} η''(t/τ) φ(|x|/R)`.
    pub fn dtt(&self, t: f64, r: f64) -> f64 {
        eta_double_prime(t / self.tau) / (self.tau * self.tau) * phi(r / self.radius)
    }

    /// `Δψ = R^{-2} (Δφ)(|x|/R) η(t/τ)`.
    pub fn laplacian(&self, t: f64, r: f64) -> f64 {
        laplacian_phi(self.n, r / self.radius) / (self.radius * self.radius) * eta(t / self.tau)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFnError {
    /// Supremum ratios kept growing under grid refinement; this indicates a
    /// defect in the derivative formulas rather than in the analysis.
    RatioDiverged { which: &'static str, coarse: f64, fine: f64 },
    ExponentOutOfRange(f64),
}

impl core::fmt::Display for TestFnError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::RatioDiverged { which, coarse, fine } => write!(
                f,
                "bump-bound ratio {which} diverges under refinement: {coarse} -> {fine}"
            ),
            Self::ExponentOutOfRange(p) => write!(f, "p = {p} must be > 1"),
        }
    }
}

impl core::error::Error for TestFnError {}

/// Empirical suprema of the derivative-bound ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpBoundReport {
    /// `sup |Δφ| / φ^{1/p}` over the open support.
    pub c_phi: f64,
    /// `sup |η'| / η^{1/p}`.
    pub c_eta1: f64,
    /// `sup |η''| / η^{1/p}`.
    pub c_eta2: f64,
}

fn ratio_sup(points: &[f64], num: impl Fn(f64) -> f64, den: impl Fn(f64) -> f64, p: f64) -> f64 {
    let mut sup = 0.0_f64;
    for &x in points {
        let d = den(x);
        // Both numerator and denominator vanish to all orders at the support
        // boundary; points where the base has underflowed contribute 0.
        if d < 1e-300 {
            continue;
        }
        let r = num(x).abs() / powf(d, 1.0 / p);
        sup = sup.max(r);
    }
    sup
}

/// Grid on `[lo, hi)`: `base` uniform points plus geometric refinement
/// towards `hi`, where the ratio extrema sit.
fn refined_grid(lo: f64, hi: f64, base: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(base + 48 * 32);
    let h = (hi - lo) / base as f64;
    for i in 0..base {
        pts.push(lo + i as f64 * h);
    }
    let mut scale = 0.5 * (hi - lo);
    for _ in 0..48 {
        let next = 0.5 * scale;
        for j in 0..32 {
            pts.push(hi - scale + (scale - next) * j as f64 / 32.0);
        }
        scale = next;
    }
    pts
}

/// Measure the suprema in the bounds `|Δφ| ≤ C φ^{1/p}` and
/// `|η'|, |η''| ≤ C η^{1/p}` on a refined grid of `base_grid` points, and
/// verify they are stable (within 5%) against a once-refined grid.
pub fn verify_bump_bounds(n: u32, p: f64, base_grid: usize) -> Result<BumpBoundReport, TestFnError> {
    if p <= 1.0 {
        return Err(TestFnError::ExponentOutOfRange(p));
    }
    let report_at = |grid: usize| -> BumpBoundReport {
        let xs = refined_grid(0.0, 1.0, grid);
        let ts = refined_grid(0.5, 1.0, grid);
        BumpBoundReport {
            c_phi: ratio_sup(&xs, |s| laplacian_phi(n, s), phi, p),
            c_eta1: ratio_sup(&ts, eta_prime, eta, p),
            c_eta2: ratio_sup(&ts, eta_double_prime, eta, p),
        }
    };
    let coarse = report_at(base_grid);
    let fine = report_at(2 * base_grid);
    for (which, c, f) in [
        ("|lap phi|/phi^(1/p)", coarse.c_phi, fine.c_phi),
        ("|eta'|/eta^(1/p)", coarse.c_eta1, fine.c_eta1),
        ("|eta''|/eta^(1/p)", coarse.c_eta2, fine.c_eta2),
    ] {
        if !(f.is_finite() && c.is_finite()) || f > 1.05 * c {
            return Err(TestFnError::RatioDiverged {
                which,
                coarse: c,
                fine: f,
            });
        }
    }
    Ok(fine)
}

/// Gap of the Young-type inequality `a c^b - c ≤ (1-b) b^{b/(1-b)} a^{1/(1-b)}`
/// for `a > 0`, `0 < b < 1`, `c ≥ 0`: returns `rhs - lhs`, which is
/// nonnegative up to rounding.
pub fn young_gap(a: f64, b: f64, c: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0 && b < 1.0 && c >= 0.0);
    let rhs = (1.0 - b) * powf(b, b / (1.0 - b)) * powf(a, 1.0 / (1.0 - b));
    let lhs = a * powf(c, b) - c;
    rhs - lhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E_INV: f64 = 0.36787944117144233;

    #[test]
    fn phi_center_and_boundary() {
        assert!((phi(0.0) - E_INV).abs() < 1e-16);
        assert_eq!(phi(1.0), 0.0);
        assert_eq!(phi(1.7), 0.0);
        assert_eq!(laplacian_phi(1, 1.0), 0.0);
        assert_eq!(grad_phi(1.0), 0.0);
    }

    #[test]
    fn phi_no_nan_near_support_boundary() {
        let mut s = 0.99;
        while s < 1.01 {
            for v in [phi(s), grad_phi(s), laplacian_phi(3, s)] {
                assert!(v.is_finite(), "s={s}: {v}");
            }
            s += 1e-5;
        }
    }

    #[test]
    fn laplacian_at_origin_is_minus_two_n_over_e() {
        for n in 1..=4u32 {
            let want = -2.0 * n as f64 * E_INV;
            let got = laplacian_phi(n, 0.0);
            assert!((got - want).abs() < 1e-14, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn laplacian_matches_finite_difference_n1() {
        // n = 1: Δφ = φ''; central difference oracle at s = 0.5.
        let h = 1e-4;
        let s = 0.5;
        let fd = (phi(s + h) - 2.0 * phi(s) + phi(s - h)) / (h * h);
        let an = laplacian_phi(1, s);
        assert!((fd - an).abs() <= 1e-6 * an.abs(), "fd={fd} analytic={an}");
    }

    #[test]
    fn laplacian_matches_finite_difference_radial() {
        // n = 3: Δφ = φ'' + 2 φ'/s via independent difference quotients.
        let h = 1e-5;
        for &s in &[0.2, 0.5, 0.8] {
            let fd2 = (phi(s + h) - 2.0 * phi(s) + phi(s - h)) / (h * h);
            let fd1 = (phi(s + h) - phi(s - h)) / (2.0 * h);
            let want = fd2 + 2.0 * fd1 / s;
            let got = laplacian_phi(3, s);
            assert!(
                (want - got).abs() <= 1e-5 * got.abs().max(1.0),
                "s={s}: fd={want} analytic={got}"
            );
        }
    }

    #[test]
    fn eta_plateaus_and_transition() {
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(0.25), 1.0);
        assert_eq!(eta_prime(0.25), 0.0);
        assert_eq!(eta(1.0), 0.0);
        assert_eq!(eta(5.0), 0.0);
        let v = eta(0.75);
        assert!(v > 0.0 && v < 1.0, "eta(0.75) = {v}");
        // continuity at the seams
        assert!((eta(0.5 + 1e-9) - 1.0).abs() < 1e-6);
        assert!(eta(1.0 - 1e-9) < 1e-6);
    }

    #[test]
    fn eta_monotone_decreasing_on_transition() {
        let mut prev = eta(0.5);
        let mut t: f64 = 0.5;
        while t < 1.0 {
            t += 1e-3;
            let v = eta(t.min(1.0));
            assert!(v <= prev + 1e-12, "eta increased at t={t}");
            prev = v;
        }
    }

    #[test]
    fn eta_derivatives_match_finite_differences() {
        let h = 1e-5;
        let mut t = 0.55;
        while t < 0.99 {
            let fd1 = (eta(t + h) - eta(t - h)) / (2.0 * h);
            let fd2 = (eta(t + h) - 2.0 * eta(t) + eta(t - h)) / (h * h);
            let a1 = eta_prime(t);
            let a2 = eta_double_prime(t);
            assert!((fd1 - a1).abs() < 1e-5 * a1.abs().max(1.0), "t={t}: {fd1} vs {a1}");
            assert!((fd2 - a2).abs() < 1e-3 * a2.abs().max(1.0), "t={t}: {fd2} vs {a2}");
            t += 0.02;
        }
    }

    #[test]
    fn cutoff_scaling_identities() {
        let psi = SpaceTimeCutoff::new(3.0, 2.0, 1);
        let (t, r) = (2.1, 1.3);
        let h = 1e-5;
        // ∂_t ψ against finite difference of the value.
        let fd_t = (psi.value(t + h, r) - psi.value(t - h, r)) / (2.0 * h);
        assert!((fd_t - psi.dt(t, r)).abs() < 1e-8);
        let fd_tt = (psi.value(t + h, r) - 2.0 * psi.value(t, r) + psi.value(t - h, r)) / (h * h);
        assert!((fd_tt - psi.dtt(t, r)).abs() < 1e-4 * psi.dtt(t, r).abs().max(1.0));
        // Δψ (n = 1) against second difference in r.
        let fd_rr = (psi.value(t, r + h) - 2.0 * psi.value(t, r) + psi.value(t, r - h)) / (h * h);
        assert!((fd_rr - psi.laplacian(t, r)).abs() < 1e-4 * psi.laplacian(t, r).abs().max(1.0));
    }

    #[test]
    fn cutoff_time_derivative_vanishes_at_zero() {
        let psi = SpaceTimeCutoff::new(7.0, 5.0, 2);
        for &r in &[0.0, 1.0, 3.0, 4.999] {
            assert_eq!(psi.dt(0.0, r), 0.0);
        }
    }

    #[test]
    fn smoothness_across_support_seams() {
        // Finite-difference jumps of φ and its derivatives across |x| = 1
        // shrink at second order under grid refinement.
        for &(h, tol) in &[(1e-3, 1e-5), (5e-4, 2.5e-6)] {
            let jump = (phi(1.0 + h) - phi(1.0 - h)).abs();
            assert!(jump <= tol, "h={h}: jump {jump}");
        }
        for &f in &[eta, eta_prime, eta_double_prime] {
            for &seam in &[0.5, 1.0] {
                let h = 1e-6;
                let jump = (f(seam + h) - f(seam - h)).abs();
                assert!(jump < 1e-4, "seam {seam}: jump {jump}");
            }
        }
    }

    #[test]
    fn bump_bounds_finite_for_reference_exponents() {
        for &p in &[1.2, 2.0, 3.0] {
            let rep = verify_bump_bounds(1, p, 20_000).unwrap();
            assert!(rep.c_phi > 0.0 && rep.c_phi.is_finite());
            assert!(rep.c_eta1 > 0.0 && rep.c_eta1.is_finite());
            assert!(rep.c_eta2 > 0.0 && rep.c_eta2.is_finite());
        }
        // large p (q -> 1) stays finite too
        assert!(verify_bump_bounds(1, 50.0, 20_000).is_ok());
    }

    #[test]
    fn eta_prime_ratio_zero_on_plateau() {
        for &t in &[0.0, 0.2, 0.49] {
            assert_eq!(eta_prime(t), 0.0);
        }
    }

    #[test]
    fn young_gap_closed_form_cases() {
        // c = 0 reduces to the pure power term.
        let g = young_gap(2.0, 0.5, 0.0);
        assert!((g - 0.5 * 0.5 * 4.0).abs() < 1e-14);
        // optimal c* = (a b)^{1/(1-b)} closes the gap.
        for &(a, b) in &[(0.7, 0.3), (1.0, 0.5), (0.2, 0.8)] {
            let c_star = powf(a * b, 1.0 / (1.0 - b));
            let g = young_gap(a, b, c_star);
            assert!(g.abs() <= 1e-10, "a={a} b={b}: gap {g}");
        }
    }

    proptest! {
        #[test]
        fn young_gap_nonnegative(a in 1e-6f64..1.0, b in 0.01f64..0.99, c in 0.0f64..4.0) {
            prop_assert!(young_gap(a, b, c) >= -1e-12);
        }

        #[test]
        fn phi_range_bounds(s in -2.0f64..2.0) {
            let v = phi(s);
            prop_assert!((0.0..=E_INV + 1e-15).contains(&v));
        }

        #[test]
        fn eta_range_bounds(t in 0.0f64..3.0) {
            let v = eta(t);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
