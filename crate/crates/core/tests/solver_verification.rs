//! Solver verification battery: energy conservation of the free wave,
//! second-order convergence against closed-form and manufactured solutions,
//! and blow-up times checked against an independent high-order ODE oracle.

use dwlab_core::solver::{
    self, compute_norms, DataFamily, ProblemSpec, RadialGrid, RunOutcome, WaveStepper,
};
use dwlab_core::theory::DampingSpec;

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}

#[test]
fn free_wave_energy_drift_below_1e4_over_unit_time() {
    // Φ = 0 via the general-spatial hook, source off, dx = 1e-3.
    fn zero(_r: f64) -> f64 {
        0.0
    }
    let damping = DampingSpec::general_spatial(0.0, zero).unwrap();
    let grid = RadialGrid::new(3.0, 1e-3);
    let mut stepper = WaveStepper::new(&grid, 1, 2.0, damping).with_source(false);
    let u0: Vec<f64> = grid.radii().map(dwlab_core::testfn::phi).collect();
    let u1 = vec![0.0; grid.len()];
    let dt = 0.9e-3;
    let (_, _, e0) = compute_norms(&grid, 1, &u0, &u1);

    let mut state = stepper.init_state(&u0, &u1, dt);
    let mut max_drift = 0.0_f64;
    let mut step = 0usize;
    while state.t < 1.0 {
        stepper.step(&mut state);
        step += 1;
        if step % 25 == 0 {
            let v = stepper.velocity(&state);
            let (_, _, e) = compute_norms(&grid, 1, &state.u_cur, &v);
            max_drift = max_drift.max((e - e0).abs() / e0);
        }
    }
    assert!(max_drift <= 1e-4, "energy drift {max_drift}");
}

#[test]
fn standing_mode_dispersion_second_order() {
    // u = cos(k r) cos(k t) with k = 3π/2 solves the free wave equation on
    // [0, 1] with the symmetric origin and Dirichlet end.
    fn zero(_r: f64) -> f64 {
        0.0
    }
    let k = 1.5 * std::f64::consts::PI;
    let t_end = 1.0;
    let mut errors = Vec::new();
    for &dx in &[1e-2, 5e-3, 2.5e-3] {
        let damping = DampingSpec::general_spatial(0.0, zero).unwrap();
        let grid = RadialGrid::new(1.0, dx);
        let mut stepper = WaveStepper::new(&grid, 1, 2.0, damping).with_source(false);
        let u0: Vec<f64> = grid.radii().map(|r| (k * r).cos()).collect();
        let u1 = vec![0.0; grid.len()];
        let steps = (t_end / (0.9 * dx)).ceil() as usize;
        let dt = t_end / steps as f64;
        let mut state = stepper.init_state(&u0, &u1, dt);
        for _ in 0..steps - 1 {
            stepper.step(&mut state);
        }
        assert!((state.t - t_end).abs() < 1e-12);
        let w = grid.volume_weights(1);
        let mut err2 = 0.0;
        for i in 0..grid.len() {
            let exact = (k * grid.r(i)).cos() * (k * t_end).cos();
            err2 += w[i] * (state.u_cur[i] - exact).powi(2);
        }
        errors.push(err2.sqrt());
    }
    let r1 = (errors[0] / errors[1]).log2();
    let r2 = (errors[1] / errors[2]).log2();
    assert!(
        r1 > 1.8 && r2 > 1.8,
        "dispersion convergence rates {r1}, {r2} (errors {errors:?})"
    );
}

/// Manufactured solution `u = cos(ω t) w(r)`, `w = (1 - (r/L)²)²`, driven by
/// the closed-form forcing for the full damped nonlinear equation.
fn mms_error(n: u32, alpha: f64, beta: f64, dx: f64) -> f64 {
    let length = 2.0;
    let omega = 2.0;
    let p = 2.0;
    let t_end = 0.5;
    let damping = DampingSpec::power(alpha, beta).unwrap();

    let w = move |r: f64| {
        let s = r / length;
        (1.0 - s * s) * (1.0 - s * s)
    };
    let lap_w = move |r: f64| {
        let s = r / length;
        ((12.0 * s * s - 4.0) - 4.0 * (n as f64 - 1.0) * (1.0 - s * s)) / (length * length)
    };
    let phi_coeff = move |t: f64, r: f64| {
        (1.0 + r * r).sqrt().powf(-alpha) * (1.0 + t).powf(-beta)
    };
    let forcing = move |t: f64, r: f64| {
        let c = (omega * t).cos();
        let s = (omega * t).sin();
        let u = c * w(r);
        -omega * omega * c * w(r) - c * lap_w(r) + phi_coeff(t, r) * (-omega * s * w(r))
            - u.abs().powf(p)
    };

    let grid = RadialGrid::new(length, dx);
    let mut stepper = WaveStepper::new(&grid, n, p, damping).with_forcing(&forcing);
    let u0: Vec<f64> = grid.radii().map(w).collect();
    let u1 = vec![0.0; grid.len()];
    let steps = (t_end * (n as f64).sqrt() / (0.9 * dx)).ceil() as usize;
    let dt = t_end / steps as f64;
    let mut state = stepper.init_state(&u0, &u1, dt);
    for _ in 0..steps - 1 {
        stepper.step(&mut state);
    }
    let weights = grid.volume_weights(n);
    let mut err2 = 0.0;
    for i in 0..grid.len() {
        let exact = (omega * t_end).cos() * w(grid.r(i));
        err2 += weights[i] * (state.u_cur[i] - exact).powi(2);
    }
    err2.sqrt()
}

#[test]
fn manufactured_solution_second_order_spatial() {
    for (n, alpha, beta) in [(1, 0.0, 0.5), (3, 0.5, 0.0)] {
        let e1 = mms_error(n, alpha, beta, 0.02);
        let e2 = mms_error(n, alpha, beta, 0.01);
        let rate = (e1 / e2).log2();
        assert!(
            rate > 1.8 && rate < 2.4,
            "n={n}, alpha={alpha}, beta={beta}: rate {rate} (errors {e1}, {e2})"
        );
    }
}

/// Adaptive RK4 oracle for `u'' + Φ(t) u' = |u|^p`, integrated until
/// `|u| = 1e12`; the remaining time to blow-up at that height is below
/// 1e-5 for the parameters used here.
fn ode_blowup_oracle(p: f64, beta: f64, u0: f64, v0: f64) -> f64 {
    let (mut u, mut v, mut t) = (u0, v0, 0.0_f64);
    let rhs = |t: f64, u: f64, v: f64| {
        (v, u.abs().powf(p) - (1.0 + t).powf(-beta) * v)
    };
    while u.abs() < 1e12 && t < 1e4 {
        let dt = 1e-4 / (1.0 + p * u.abs().powf(p - 1.0)).sqrt();
        let (k1u, k1v) = rhs(t, u, v);
        let (k2u, k2v) = rhs(t + 0.5 * dt, u + 0.5 * dt * k1u, v + 0.5 * dt * k1v);
        let (k3u, k3v) = rhs(t + 0.5 * dt, u + 0.5 * dt * k2u, v + 0.5 * dt * k2v);
        let (k4u, k4v) = rhs(t + dt, u + dt * k3u, v + dt * k3v);
        u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t += dt;
    }
    t
}

#[test]
fn constant_mode_blowup_matches_ode_oracle() {
    // Spatially constant data on a domain wide enough that the boundary
    // rarefaction cannot reach the core before blow-up.
    let damping = DampingSpec::power(0.0, 0.0).unwrap();
    let mut spec = ProblemSpec::new(1, 2.0, damping, 1.0);
    let grid_len = RadialGrid::new(4.5, 0.01).len();
    spec.domain_radius = 4.5;
    spec.dx = 0.01;
    spec.t_max = 4.0;
    spec.blowup_threshold = 1e8;
    spec.data = DataFamily::CustomTabulated {
        u0: vec![2.0; grid_len],
        u1: vec![2.0; grid_len],
    };
    let result = solver::run(&spec).unwrap();
    let RunOutcome::BlewUp(report) = result.outcome else {
        panic!("expected blow-up");
    };
    let oracle = ode_blowup_oracle(2.0, 0.0, 2.0, 2.0);
    let rel = (report.t_est - oracle).abs() / oracle;
    assert!(
        rel <= 0.05,
        "T_est {} vs oracle {} (rel {rel})",
        report.t_est,
        oracle
    );
}

#[test]
fn heat_constant_mode_blowup_matches_riccati() {
    // Φ ≡ 1, spatially constant interior: v' = v², T = 1/v0.
    let damping = DampingSpec::power(0.0, 0.0).unwrap();
    let mut spec = ProblemSpec::new(1, 2.0, damping, 1.0);
    spec.equation = solver::Equation::Heat;
    spec.domain_radius = 6.0;
    spec.dx = 0.02;
    spec.cfl = 0.25;
    spec.t_max = 2.0;
    spec.blowup_threshold = 1e6;
    let grid_len = spec.grid().len();
    spec.data = DataFamily::CustomTabulated {
        u0: vec![2.0; grid_len],
        u1: vec![0.0; grid_len],
    };
    let result = solver::run(&spec).unwrap();
    let RunOutcome::BlewUp(report) = result.outcome else {
        panic!("expected blow-up");
    };
    let rel = (report.t_est - 0.5).abs() / 0.5;
    assert!(rel <= 0.05, "T_est {} vs 0.5 (rel {rel})", report.t_est);
}

#[test]
fn lifespan_estimate_cauchy_in_dx() {
    let damping = DampingSpec::power(0.0, 0.0).unwrap();
    let mut spec = ProblemSpec::new(1, 2.0, damping, 1.0);
    spec.data = DataFamily::PaperBump { r0: 1.0 };
    spec.t_max = 25.0;
    spec.domain_radius = 28.0;
    spec.blowup_threshold = 1e6;
    spec.dx = 0.04;
    let result = solver::run_converged(&spec, 0.05).unwrap();
    let RunOutcome::BlewUp(report) = result.outcome else {
        panic!("expected blow-up");
    };
    assert!(report.converged, "resolution pair {:?}", report.resolution_pair);
    let (dxc, tc, dxf, tf) = report.resolution_pair.unwrap();
    assert_eq!(dxc, 0.04);
    assert_eq!(dxf, 0.02);
    assert!((tc - tf).abs() / tf < 0.01, "T {tc} vs {tf}");
    assert!(sup(&result.trace.u0) > 0.0);
}

#[test]
fn heat_lifespans_decrease_with_amplitude() {
    // 1D heat analogue, p = 2 < 3 = Fujita: finite lifespans shrinking as ε
    // grows.
    let damping = DampingSpec::power(0.0, 0.0).unwrap();
    let mut t_prev = f64::INFINITY;
    for &eps in &[0.65, 0.8, 1.0] {
        let mut spec = ProblemSpec::new(1, 2.0, damping, eps);
        spec.equation = solver::Equation::Heat;
        spec.data = DataFamily::PaperBump { r0: 1.0 };
        spec.domain_radius = 30.0;
        spec.dx = 0.02;
        spec.cfl = 0.5;
        spec.t_max = 80.0;
        spec.blowup_threshold = 1e6;
        let result = solver::run(&spec).unwrap();
        let RunOutcome::BlewUp(report) = result.outcome else {
            panic!("expected blow-up at eps={eps}");
        };
        assert!(
            report.t_est < t_prev,
            "lifespan not decreasing: {} !< {t_prev}",
            report.t_est
        );
        t_prev = report.t_est;
    }
}
