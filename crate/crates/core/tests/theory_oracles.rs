//! Independent quadrature oracles for the closed-form layer: the constant
//! `B`, the gauge residual, and asymptotics. The oracle here integrates in
//! the raw `t` variable with a fixed composite Simpson rule — a different
//! variable and a different rule than the implementation uses.

use dwlab_core::theory::{compute_b, gauge};

/// `B(1/2) = 2/3` by the substitution `s = sqrt(1+t)`:
/// `∫_0^∞ e^{-2(sqrt(1+t)-1)} dt = 2e^2 ∫_1^∞ s e^{-2s} ds = 3/2`.
const B_HALF: f64 = 2.0 / 3.0;
/// High-precision quadrature value (30-digit arithmetic, frozen).
const B_MINUS_HALF: f64 = 1.277_275_085_713_954_7;
/// High-precision quadrature value (30-digit arithmetic, frozen).
const B_QUARTER: f64 = 0.843_534_191_673_403_1;

/// Composite-Simpson oracle for `B` in the original variable, truncated
/// where the inner exponent reaches 120.
fn b_oracle(beta: f64) -> f64 {
    let c = 1.0 - beta;
    let t_star = (1.0 + 120.0 * c).powf(1.0 / c) - 1.0;
    let g = |t: f64| (-((1.0 + t).powf(c) - 1.0) / c).exp();
    let panels = 400_000;
    let h = t_star / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let a = k as f64 * h;
        acc += h / 6.0 * (g(a) + 4.0 * g(a + 0.5 * h) + g(a + h));
    }
    1.0 / acc
}

#[test]
fn b_matches_frozen_values_and_oracle() {
    for (beta, frozen) in [(0.5, B_HALF), (-0.5, B_MINUS_HALF), (0.25, B_QUARTER)] {
        let implemented = compute_b(beta).unwrap();
        let oracle = b_oracle(beta);
        assert!(
            (implemented - frozen).abs() < 1e-8,
            "beta={beta}: implementation {implemented} vs frozen {frozen}"
        );
        assert!(
            (oracle - frozen).abs() < 1e-8,
            "beta={beta}: oracle {oracle} vs frozen {frozen}"
        );
    }
}

#[test]
fn b_of_zero_is_one_to_quadrature_tolerance() {
    let b = compute_b(0.0).unwrap();
    assert!((b - 1.0).abs() < 1e-10, "B(0) = {b}");
}

#[test]
fn b_rejects_beta_endpoints() {
    assert!(compute_b(1.0).is_err());
    assert!(compute_b(-1.0).is_err());
    assert!(compute_b(1.5).is_err());
}

/// Log-spaced sample of `[lo, hi]` including both endpoints.
fn log_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mut out = vec![lo];
    let start: f64 = 1e-2;
    let ratio = (hi / start).powf(1.0 / (count as f64 - 2.0));
    let mut t = start;
    for _ in 0..count - 1 {
        out.push(t.min(hi));
        t *= ratio;
    }
    out
}

#[test]
fn gauge_ode_residual_small_on_log_grid() {
    for &beta in &[-0.5, 0.0, 0.5] {
        let g = gauge(beta).unwrap();
        for &t in &log_samples(0.0, 1e3, 40) {
            let res = g.ode_residual(t);
            assert!(
                res.abs() <= 1e-6,
                "beta={beta}, t={t}: residual {res}"
            );
        }
    }
}

#[test]
fn gauge_matches_power_asymptote_at_large_time() {
    for &beta in &[-0.5, 0.5] {
        let g = gauge(beta).unwrap();
        let ratio = (1.0_f64 + 1e4).powf(-beta) * g.eval(1e4);
        assert!((0.99..=1.01).contains(&ratio), "beta={beta}: ratio {ratio}");
    }
}

#[test]
fn gauge_initial_value_is_inverse_b() {
    for &beta in &[-0.5, -0.25, 0.25, 0.5, 0.75] {
        let g = gauge(beta).unwrap();
        let product = g.eval(0.0) * g.b();
        assert!(
            (product - 1.0).abs() < 1e-9,
            "beta={beta}: g(0)·B = {product}"
        );
    }
}
