//! Radial finite-difference integration of the semilinear damped wave
//! equation `u_tt - Δu + Φ(t,x) u_t = |u|^p` (and its heat analogue
//! `Φ v_t = Δv + |v|^p`) with initial data `(u, u_t)(0) = ε (u_0, u_1)`,
//! blow-up detection by threshold cascade, and lifespan estimation by
//! rate extrapolation.

mod grid;
mod heat;
mod wave;

pub use grid::RadialGrid;
pub use heat::{HeatState, HeatStepper};
pub use wave::{Forcing, StepStatus, WaveState, WaveStepper};

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs_pow, powf, sqrt};
use crate::theory::{self, DampingSpec, TheoryError};

/// Initial data families for `(u_0, u_1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DataFamily {
    /// `u_0 = u_1 = φ(|x|/r0)`: nonnegative, smooth, compactly supported,
    /// and positive-mean for every admissible damping since `B > 0`.
    PaperBump { r0: f64 },
    /// Truncated Gaussians `amp · exp(-r²/(2σ²))·1_{r ≤ cutoff}`.
    GaussianTruncated {
        amp0: f64,
        amp1: f64,
        sigma: f64,
        cutoff: f64,
    },
    /// Arbitrary nodal values on the solver grid.
    CustomTabulated { u0: Vec<f64>, u1: Vec<f64> },
}

impl DataFamily {
    /// Radius of the data support, when structurally known.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Self::PaperBump { r0 } => Some(*r0),
            Self::GaussianTruncated { cutoff, .. } => Some(*cutoff),
            Self::CustomTabulated { .. } => None,
        }
    }
}

/// Which equation the run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    DampedWave,
    Heat,
}

/// Full description of one simulation.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub n: u32,
    pub p: f64,
    pub damping: DampingSpec,
    pub data: DataFamily,
    pub epsilon: f64,
    pub equation: Equation,
    pub domain_radius: f64,
    pub dx: f64,
    /// Courant number: the wave step is `dt = cfl·dx/sqrt(n)`, the heat
    /// step `dt = cfl·dx`.
    pub cfl: f64,
    /// `sup|u|` level declared as numerical blow-up.
    pub blowup_threshold: f64,
    pub t_max: f64,
    /// Time interval between recorded snapshots; `0` disables snapshots
    /// (norms-only trace).
    pub snapshot_dt: f64,
    /// Time interval between recorded norm samples; `0` picks `t_max/512`.
    pub norm_dt: f64,
    /// Permit damping coefficients outside the theorem hypotheses (αβ ≠ 0).
    pub exploratory: bool,
}

impl ProblemSpec {
    /// A spec with conventional numerical controls; fields are public and
    /// meant to be adjusted after construction.
    pub fn new(n: u32, p: f64, damping: DampingSpec, epsilon: f64) -> Self {
        Self {
            n,
            p,
            damping,
            data: DataFamily::PaperBump { r0: 1.0 },
            epsilon,
            equation: Equation::DampedWave,
            domain_radius: 16.0,
            dx: 0.02,
            cfl: 0.9,
            blowup_threshold: 1e6,
            t_max: 12.0,
            snapshot_dt: 0.0,
            norm_dt: 0.0,
            exploratory: false,
        }
    }

    pub fn grid(&self) -> RadialGrid {
        RadialGrid::new(self.domain_radius, self.dx)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.n == 0 {
            return Err(SolverError::Dimension(self.n));
        }
        if !(self.p > 1.0) {
            return Err(SolverError::Theory(TheoryError::ExponentOutOfRange(self.p)));
        }
        if !(self.epsilon > 0.0) {
            return Err(SolverError::Epsilon(self.epsilon));
        }
        if !(self.dx > 0.0 && self.domain_radius > 2.0 * self.dx) {
            return Err(SolverError::GridResolution {
                dx: self.dx,
                domain_radius: self.domain_radius,
            });
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::Cfl(self.cfl));
        }
        if !self.damping.theorem_mode() && !self.exploratory {
            if let theory::DampingMode::ExplicitPower = self.damping.mode() {
                return Err(SolverError::ExploratoryRequired {
                    alpha: self.damping.alpha(),
                    beta: self.damping.beta(),
                });
            }
        }
        // Finite propagation speed 1: the data support, enlarged by t_max,
        // must stay off the Dirichlet boundary (wave only).
        if self.equation == Equation::DampedWave {
            if let Some(support) = self.data.support_radius() {
                let needed = support + self.t_max * 1.02 + 2.0 * self.dx;
                if self.domain_radius < needed {
                    return Err(SolverError::DomainTooSmall {
                        needed,
                        got: self.domain_radius,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Dimension(u32),
    Epsilon(f64),
    GridResolution { dx: f64, domain_radius: f64 },
    Cfl(f64),
    DomainTooSmall { needed: f64, got: f64 },
    /// The positivity condition `∫ (<x>^{-α} B u_0 + u_1) dx > 0` failed.
    DataConditionViolated { integral: f64 },
    CustomDataLength { expected: usize, got: usize },
    /// αβ ≠ 0 requires the exploratory flag; the lifespan theorem does not
    /// cover mixed damping.
    ExploratoryRequired { alpha: f64, beta: f64 },
    Theory(TheoryError),
}

impl From<TheoryError> for SolverError {
    fn from(e: TheoryError) -> Self {
        Self::Theory(e)
    }
}

impl core::fmt::Display for SolverError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Dimension(n) => write!(f, "dimension n = {n} must be >= 1"),
            Self::Epsilon(e) => write!(f, "epsilon = {e} must be positive"),
            Self::GridResolution { dx, domain_radius } => {
                write!(f, "invalid grid: dx = {dx}, domain radius = {domain_radius}")
            }
            Self::Cfl(c) => write!(f, "cfl = {c} outside (0, 1]"),
            Self::DomainTooSmall { needed, got } => write!(
                f,
                "domain radius {got} too small; data support + t_max needs {needed}"
            ),
            Self::DataConditionViolated { integral } => write!(
                f,
                "initial data violates the positivity condition: integral = {integral}"
            ),
            Self::CustomDataLength { expected, got } => write!(
                f,
                "tabulated data length {got} does not match grid length {expected}"
            ),
            Self::ExploratoryRequired { alpha, beta } => write!(
                f,
                "alpha*beta != 0 (alpha = {alpha}, beta = {beta}) needs the exploratory flag"
            ),
            Self::Theory(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolverError {}

/// Sampled initial data together with the positivity-condition integral
/// `∫ (<x>^{-α} B u_0 + u_1) dx` that justifies the blow-up machinery.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub condition_integral: f64,
}

/// Sample the data family on the grid and check the positivity condition.
pub fn make_initial_data(spec: &ProblemSpec) -> Result<InitialData, SolverError> {
    let grid = spec.grid();
    let m = grid.len();
    let (mut u0, mut u1) = (vec![0.0; m], vec![0.0; m]);
    match &spec.data {
        DataFamily::PaperBump { r0 } => {
            for i in 0..m {
                let v = crate::testfn::phi(grid.r(i) / r0);
                u0[i] = v;
                u1[i] = v;
            }
        }
        DataFamily::GaussianTruncated {
            amp0,
            amp1,
            sigma,
            cutoff,
        } => {
            for i in 0..m {
                let r = grid.r(i);
                if r <= *cutoff {
                    let g = crate::math::exp(-r * r / (2.0 * sigma * sigma));
                    u0[i] = amp0 * g;
                    u1[i] = amp1 * g;
                }
            }
        }
        DataFamily::CustomTabulated { u0: c0, u1: c1 } => {
            if c0.len() != m || c1.len() != m {
                return Err(SolverError::CustomDataLength {
                    expected: m,
                    got: c0.len(),
                });
            }
            u0.copy_from_slice(c0);
            u1.copy_from_slice(c1);
        }
    }
    u0[m - 1] = 0.0;
    u1[m - 1] = 0.0;

    let b = theory::compute_b(spec.damping.beta())?;
    let weights = grid.volume_weights(spec.n);
    let mut integral = 0.0;
    let mut scale = 0.0;
    for i in 0..m {
        let weight_term = spec.damping.spatial_factor(grid.r(i)) * b * u0[i] + u1[i];
        integral += weights[i] * weight_term;
        scale += weights[i] * weight_term.abs();
    }
    if integral <= 1e-12 * scale.max(1e-300) {
        return Err(SolverError::DataConditionViolated { integral });
    }
    Ok(InitialData {
        u0,
        u1,
        condition_integral: integral,
    })
}

/// One recorded time level.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub u_t: Vec<f64>,
}

/// Norm time series entry.
#[derive(Debug, Clone, Copy)]
pub struct NormSample {
    pub t: f64,
    pub sup_u: f64,
    pub l2_u: f64,
    pub energy: f64,
}

/// Time-stamped record of a run: geometry, problem identity, unscaled data,
/// snapshots, step-size history and norm series — everything the weak-form
/// certificate needs to replay quadratures.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub grid: RadialGrid,
    pub n: u32,
    pub p: f64,
    pub damping: DampingSpec,
    pub epsilon: f64,
    pub equation: Equation,
    /// Unscaled data profiles (the run starts from `ε·(u0, u1)`).
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub condition_integral: f64,
    pub snapshots: Vec<Snapshot>,
    /// `(t, dt)` at every step-size change.
    pub dt_history: Vec<(f64, f64)>,
    pub norms: Vec<NormSample>,
}

/// How the lifespan estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupMethod {
    /// Least-squares extrapolation of `sup|u| ~ A (T - t)^{-γ}` over the
    /// final doubling events.
    ThresholdExtrapolation,
    /// The step-size cascade collapsed (or too few events for a fit);
    /// the estimate brackets the last finite time.
    DtCollapse,
}

/// Lifespan estimate with bracketing and convergence metadata.
#[derive(Debug, Clone, Copy)]
pub struct BlowupReport {
    pub t_est: f64,
    pub t_lower: f64,
    pub t_upper: f64,
    pub method: BlowupMethod,
    /// Set by two-resolution comparison; `false` when not checked.
    pub converged: bool,
    /// `(dx_coarse, T_coarse, dx_fine, T_fine)` when a refinement pair ran.
    pub resolution_pair: Option<(f64, f64, f64, f64)>,
}

/// Outcome of a run: blow-up detected, or reached `t_max` intact.
#[derive(Debug, Clone, Copy)]
pub enum RunOutcome {
    BlewUp(BlowupReport),
    Completed { t_end: f64 },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: SolutionTrace,
    pub outcome: RunOutcome,
}

/// Sup, weighted L² and energy of a state; `u_t` enters quadratically so the
/// energy is `½ ∫ (u_t² + u_r²) dx` over the radial measure.
pub fn compute_norms(grid: &RadialGrid, n: u32, u: &[f64], u_t: &[f64]) -> (f64, f64, f64) {
    let m = grid.len();
    let weights = grid.volume_weights(n);
    let dx = grid.dx();
    let mut sup = 0.0_f64;
    let mut l2 = 0.0;
    let mut energy = 0.0;
    for i in 0..m {
        sup = sup.max(u[i].abs());
        l2 += weights[i] * u[i] * u[i];
        let du = if i == 0 {
            0.0 // radial symmetry
        } else if i == m - 1 {
            (u[i] - u[i - 1]) / dx
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * dx)
        };
        energy += 0.5 * weights[i] * (u_t[i] * u_t[i] + du * du);
    }
    (sup, sqrt(l2), energy)
}

/// Largest radius at which `|u|` exceeds `tol`; 0 when the state is below
/// `tol` everywhere.
pub fn support_radius(grid: &RadialGrid, u: &[f64], tol: f64) -> f64 {
    for i in (0..grid.len()).rev() {
        if u[i].abs() > tol {
            return grid.r(i);
        }
    }
    0.0
}

/// Fraction by which a growing sup-norm must multiply to log a doubling
/// event and re-evaluate the step-size cascade.
const EVENT_FACTOR: f64 = 2.0;
/// Source-stability constant: near blow-up the step obeys
/// `dt ≤ C_SRC / sqrt(p · m^{p-1})` (wave) so the local exponential rate
/// stays resolved; this implements the cascade that tightens `dt` at every
/// doubling of `sup|u|`.
const C_SRC: f64 = 0.02;
/// Floor on `dt` reductions; collapsing past this aborts the run as blow-up.
const DT_FLOOR: f64 = 1e-12;
/// Number of trailing doubling events entering the lifespan fit.
const FIT_EVENTS: usize = 8;

struct Recorder {
    snapshot_dt: f64,
    norm_dt: f64,
    next_snapshot: f64,
    next_norm: f64,
    snapshots: Vec<Snapshot>,
    norms: Vec<NormSample>,
    dt_history: Vec<(f64, f64)>,
}

impl Recorder {
    fn new(spec: &ProblemSpec) -> Self {
        let norm_dt = if spec.norm_dt > 0.0 {
            spec.norm_dt
        } else {
            spec.t_max / 512.0
        };
        Self {
            snapshot_dt: spec.snapshot_dt,
            norm_dt,
            next_snapshot: 0.0,
            next_norm: 0.0,
            snapshots: Vec::new(),
            norms: Vec::new(),
            dt_history: Vec::new(),
        }
    }

    fn record(
        &mut self,
        grid: &RadialGrid,
        n: u32,
        t: f64,
        u: &[f64],
        u_t: impl FnOnce() -> Vec<f64>,
    ) {
        let want_snap = self.snapshot_dt > 0.0 && t >= self.next_snapshot;
        let want_norm = t >= self.next_norm;
        if !(want_snap || want_norm) {
            return;
        }
        let velocity = u_t();
        if want_norm {
            let (sup, l2, energy) = compute_norms(grid, n, u, &velocity);
            self.norms.push(NormSample {
                t,
                sup_u: sup,
                l2_u: l2,
                energy,
            });
            while self.next_norm <= t {
                self.next_norm += self.norm_dt;
            }
        }
        if want_snap {
            self.snapshots.push(Snapshot {
                t,
                u: u.to_vec(),
                u_t: velocity,
            });
            while self.next_snapshot <= t {
                self.next_snapshot += self.snapshot_dt;
            }
        }
    }
}

/// Doubling-event bookkeeping shared by the wave and heat drivers.
struct Cascade {
    events: Vec<(f64, f64)>,
    m_ref: f64,
    /// exponent of the local ODE rate: `sqrt(p·m^{p-1})` for the wave (two
    /// time derivatives), `p·m^{p-1}` for the heat equation.
    wave_like: bool,
    p: f64,
    dt_cap: f64,
}

impl Cascade {
    fn new(p: f64, dt_cap: f64, wave_like: bool, m0: f64) -> Self {
        Self {
            events: Vec::new(),
            m_ref: m0.max(1e-300),
            wave_like,
            p,
            dt_cap,
        }
    }

    /// Returns the new target `dt` when a doubling event fires.
    fn observe(&mut self, t: f64, sup: f64) -> Option<f64> {
        if sup < EVENT_FACTOR * self.m_ref {
            return None;
        }
        self.m_ref = sup;
        self.events.push((t, sup));
        let rate = if self.wave_like {
            sqrt(self.p * abs_pow(sup, self.p - 1.0))
        } else {
            self.p * abs_pow(sup, self.p - 1.0)
        };
        Some((C_SRC / rate).min(self.dt_cap))
    }

    /// Least-squares lifespan extrapolation: `sup ~ A (T-t)^{-γ}` linearises
    /// as `sup^{-1/γ} = c (T - t)`, so a line fit through the trailing events
    /// crosses zero at `T`.
    fn fit_lifespan(&self, gamma: f64, t_last: f64) -> Option<f64> {
        let k = self.events.len();
        if k < 3 {
            return None;
        }
        let window = &self.events[k.saturating_sub(FIT_EVENTS)..];
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        let m = window.len() as f64;
        for &(t, sup) in window {
            let y = powf(sup, -1.0 / gamma);
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
        }
        let denom = m * sxx - sx * sx;
        if denom.abs() < 1e-300 {
            return None;
        }
        let slope = (m * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / m;
        if slope >= 0.0 {
            return None;
        }
        let t_blow = -intercept / slope;
        (t_blow > t_last).then_some(t_blow)
    }

    fn report(&self, gamma: f64, t_last: f64) -> BlowupReport {
        match self.fit_lifespan(gamma, t_last) {
            Some(t_est) => BlowupReport {
                t_est,
                t_lower: t_last,
                t_upper: t_last + 2.0 * (t_est - t_last),
                method: BlowupMethod::ThresholdExtrapolation,
                converged: false,
                resolution_pair: None,
            },
            None => {
                // Bracket from the spacing of the final events.
                let gap = match self.events.len() {
                    0 | 1 => 0.0,
                    k => t_last - self.events[k - 2].0,
                };
                BlowupReport {
                    t_est: t_last + gap,
                    t_lower: t_last,
                    t_upper: t_last + 2.0 * gap.max(f64::MIN_POSITIVE),
                    method: BlowupMethod::DtCollapse,
                    converged: false,
                    resolution_pair: None,
                }
            }
        }
    }
}

/// Integrate the problem until `t_max` or numerical blow-up, recording a
/// trace. Near blow-up the step size follows the doubling cascade; the
/// lifespan estimate extrapolates the ODE-rate envelope
/// `sup|u| ~ A (T-t)^{-2/(p-1)}` (`-1/(p-1)` for the heat analogue).
pub fn run(spec: &ProblemSpec) -> Result<RunResult, SolverError> {
    spec.validate()?;
    let data = make_initial_data(spec)?;
    match spec.equation {
        Equation::DampedWave => run_wave(spec, data),
        Equation::Heat => run_heat(spec, data),
    }
}

fn finish(
    spec: &ProblemSpec,
    grid: RadialGrid,
    data: InitialData,
    rec: Recorder,
    outcome: RunOutcome,
) -> RunResult {
    RunResult {
        trace: SolutionTrace {
            grid,
            n: spec.n,
            p: spec.p,
            damping: spec.damping,
            epsilon: spec.epsilon,
            equation: spec.equation,
            u0: data.u0,
            u1: data.u1,
            condition_integral: data.condition_integral,
            snapshots: rec.snapshots,
            dt_history: rec.dt_history,
            norms: rec.norms,
        },
        outcome,
    }
}

fn run_wave(spec: &ProblemSpec, data: InitialData) -> Result<RunResult, SolverError> {
    let grid = spec.grid();
    let m = grid.len();
    let mut stepper = WaveStepper::new(&grid, spec.n, spec.p, spec.damping);
    let mut rec = Recorder::new(spec);

    let scaled0: Vec<f64> = data.u0.iter().map(|&v| spec.epsilon * v).collect();
    let scaled1: Vec<f64> = data.u1.iter().map(|&v| spec.epsilon * v).collect();
    // The origin row of the radial Laplacian scales its Gershgorin radius by
    // n, so the stable step shrinks by sqrt(n).
    let dt0 = spec.cfl * spec.dx / sqrt(spec.n as f64);
    rec.record(&grid, spec.n, 0.0, &scaled0, || scaled1.clone());
    rec.dt_history.push((0.0, dt0));

    let mut state = stepper.init_state(&scaled0, &scaled1, dt0);
    let sup0 = scaled0.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let mut cascade = Cascade::new(spec.p, dt0, true, sup0.max(1e-6));
    let gamma = 2.0 / (spec.p - 1.0);

    loop {
        let sup = state.u_cur.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        if !sup.is_finite() || sup >= spec.blowup_threshold {
            let report = cascade.report(gamma, state.t);
            return Ok(finish(
                spec,
                grid.clone(),
                data,
                rec,
                RunOutcome::BlewUp(report),
            ));
        }
        rec.record(&grid, spec.n, state.t, &state.u_cur, || {
            stepper.velocity(&state)
        });
        if state.t >= spec.t_max {
            return Ok(finish(
                spec,
                grid.clone(),
                data,
                rec,
                RunOutcome::Completed { t_end: state.t },
            ));
        }
        if let Some(dt_target) = cascade.observe(state.t, sup) {
            if dt_target < 0.75 * state.dt {
                if dt_target < DT_FLOOR {
                    let report = cascade.report(gamma, state.t);
                    return Ok(finish(
                        spec,
                        grid.clone(),
                        data,
                        rec,
                        RunOutcome::BlewUp(report),
                    ));
                }
                stepper.change_dt(&mut state, dt_target);
                rec.dt_history.push((state.t, dt_target));
            }
        }
        if stepper.step(&mut state) == StepStatus::NonFinite {
            let report = cascade.report(gamma, state.t);
            return Ok(finish(
                spec,
                grid.clone(),
                data,
                rec,
                RunOutcome::BlewUp(report),
            ));
        }
        debug_assert_eq!(state.u_cur.len(), m);
    }
}

fn run_heat(spec: &ProblemSpec, data: InitialData) -> Result<RunResult, SolverError> {
    let grid = spec.grid();
    let mut stepper = HeatStepper::new(&grid, spec.n, spec.p, spec.damping);
    let mut rec = Recorder::new(spec);

    // Heat initial value is ε·u0; u1 has no role in the first-order equation.
    let scaled0: Vec<f64> = data.u0.iter().map(|&v| spec.epsilon * v).collect();
    let dt0 = spec.cfl * spec.dx;
    rec.record(&grid, spec.n, 0.0, &scaled0, || vec![0.0; grid.len()]);
    rec.dt_history.push((0.0, dt0));

    let mut state = stepper.init_state(&scaled0, dt0);
    let sup0 = scaled0.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let mut cascade = Cascade::new(spec.p, dt0, false, sup0.max(1e-6));
    let gamma = 1.0 / (spec.p - 1.0);

    loop {
        let sup = state.v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        if !sup.is_finite() || sup >= spec.blowup_threshold {
            let report = cascade.report(gamma, state.t);
            return Ok(finish(
                spec,
                grid.clone(),
                data,
                rec,
                RunOutcome::BlewUp(report),
            ));
        }
        rec.record(&grid, spec.n, state.t, &state.v, || stepper.velocity(&state));
        if state.t >= spec.t_max {
            return Ok(finish(
                spec,
                grid.clone(),
                data,
                rec,
                RunOutcome::Completed { t_end: state.t },
            ));
        }
        if let Some(dt_target) = cascade.observe(state.t, sup) {
            // Scale the heat rate by the weakest damping on the grid: the
            // effective ODE is v' = |v|^p / Φ.
            let phi_min = grid
                .radii()
                .map(|r| spec.damping.phi(state.t, r))
                .fold(f64::INFINITY, f64::min)
                .max(1e-8);
            let dt_target = (dt_target * phi_min).min(state.dt);
            if dt_target < 0.75 * state.dt {
                if dt_target < DT_FLOOR {
                    let report = cascade.report(gamma, state.t);
                    return Ok(finish(
                        spec,
                        grid.clone(),
                        data,
                        rec,
                        RunOutcome::BlewUp(report),
                    ));
                }
                state.dt = dt_target;
                rec.dt_history.push((state.t, dt_target));
            }
        }
        if stepper.step(&mut state) == StepStatus::NonFinite {
            let report = cascade.report(gamma, state.t);
            return Ok(finish(
                spec,
                grid.clone(),
                data,
                rec,
                RunOutcome::BlewUp(report),
            ));
        }
    }
}

/// Run at `dx` and `dx/2`; the returned result is the fine run with the
/// two-resolution convergence verdict filled in (`rel_tol` relative
/// agreement of the two lifespan estimates).
pub fn run_converged(spec: &ProblemSpec, rel_tol: f64) -> Result<RunResult, SolverError> {
    let coarse = run(spec)?;
    let mut fine_spec = spec.clone();
    fine_spec.dx = 0.5 * spec.dx;
    let mut fine = run(&fine_spec)?;
    if let (RunOutcome::BlewUp(rc), RunOutcome::BlewUp(rf)) = (&coarse.outcome, &mut fine.outcome) {
        let rel = (rc.t_est - rf.t_est).abs() / rf.t_est.abs().max(1e-300);
        rf.converged = rel <= rel_tol;
        rf.resolution_pair = Some((spec.dx, rc.t_est, fine_spec.dx, rf.t_est));
    }
    Ok(fine)
}

/// Weighted integral of a nodal field over the radial measure.
pub fn radial_integral(grid: &RadialGrid, n: u32, values: &[f64]) -> f64 {
    let weights = grid.volume_weights(n);
    let mut acc = 0.0;
    for i in 0..grid.len() {
        acc += weights[i] * values[i];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump_spec() -> ProblemSpec {
        let damping = DampingSpec::power(0.0, 0.0).unwrap();
        let mut spec = ProblemSpec::new(1, 2.0, damping, 1.0);
        spec.t_max = 4.0;
        spec.domain_radius = 6.0;
        spec.dx = 0.05;
        spec
    }

    #[test]
    fn paper_bump_data_satisfies_condition() {
        let spec = bump_spec();
        let data = make_initial_data(&spec).unwrap();
        // ∫(B u0 + u1) dx = 2 · 2∫_0^1 φ = 4 · 0.221996908084…
        let want = 4.0 * 0.221_996_908_084_039_7;
        assert!(
            (data.condition_integral - want).abs() < 1e-3 * want,
            "got {}",
            data.condition_integral
        );
    }

    #[test]
    fn negative_multiple_of_weight_is_rejected() {
        let mut spec = bump_spec();
        let grid = spec.grid();
        let b = 1.0; // beta = 0
        let u0: Vec<f64> = grid.radii().map(|r| crate::testfn::phi(r)).collect();
        let u1: Vec<f64> = u0.iter().map(|&v| -2.0 * b * v).collect();
        spec.data = DataFamily::CustomTabulated { u0, u1 };
        match make_initial_data(&spec) {
            Err(SolverError::DataConditionViolated { integral }) => assert!(integral < 0.0),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn gaussian_positive_amplitude_accepted() {
        let mut spec = bump_spec();
        spec.data = DataFamily::GaussianTruncated {
            amp0: 1.0,
            amp1: 0.5,
            sigma: 0.4,
            cutoff: 1.5,
        };
        let data = make_initial_data(&spec).unwrap();
        assert!(data.condition_integral > 0.0);
    }

    #[test]
    fn mixed_damping_needs_exploratory_flag() {
        let damping = DampingSpec::power(0.3, 0.3).unwrap();
        let mut spec = ProblemSpec::new(1, 2.0, damping, 1.0);
        spec.t_max = 1.0;
        spec.domain_radius = 4.0;
        assert!(matches!(
            spec.validate(),
            Err(SolverError::ExploratoryRequired { .. })
        ));
        spec.exploratory = true;
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn domain_rule_enforced() {
        let mut spec = bump_spec();
        spec.t_max = 100.0;
        assert!(matches!(
            spec.validate(),
            Err(SolverError::DomainTooSmall { .. })
        ));
    }

    #[test]
    fn subcritical_unit_amplitude_blows_up() {
        let mut spec = bump_spec();
        spec.t_max = 40.0;
        spec.domain_radius = 43.0;
        spec.blowup_threshold = 1e5;
        let result = run(&spec).unwrap();
        match result.outcome {
            RunOutcome::BlewUp(report) => {
                assert!(report.t_est > 0.0 && report.t_est < 40.0);
                assert!(report.t_lower <= report.t_est && report.t_est <= report.t_upper);
                assert_eq!(report.method, BlowupMethod::ThresholdExtrapolation);
            }
            RunOutcome::Completed { .. } => panic!("expected blow-up"),
        }
    }

    #[test]
    fn supercritical_small_data_survives() {
        // n = 1, p = 4 > 3 = 1 + 2/n, tiny amplitude: global in the observed
        // window.
        let damping = DampingSpec::power(0.0, 0.0).unwrap();
        let mut spec = ProblemSpec::new(1, 4.0, damping, 0.01);
        spec.t_max = 20.0;
        spec.domain_radius = 23.0;
        spec.dx = 0.05;
        let result = run(&spec).unwrap();
        assert!(matches!(result.outcome, RunOutcome::Completed { .. }));
    }

    #[test]
    fn damped_energy_never_increases() {
        // Source off, Φ = 1 ≥ 0: discrete energy is monotone non-increasing.
        let grid = RadialGrid::new(4.0, 0.02);
        let damping = DampingSpec::power(0.0, 0.0).unwrap();
        let mut stepper = WaveStepper::new(&grid, 1, 2.0, damping).with_source(false);
        let u0: Vec<f64> = grid.radii().map(|r| crate::testfn::phi(r)).collect();
        let u1 = vec![0.0; grid.len()];
        let mut state = stepper.init_state(&u0, &u1, 0.018);
        let v = stepper.velocity(&state);
        let (_, _, mut prev_energy) = compute_norms(&grid, 1, &state.u_cur, &v);
        for _ in 0..300 {
            stepper.step(&mut state);
            let v = stepper.velocity(&state);
            let (_, _, energy) = compute_norms(&grid, 1, &state.u_cur, &v);
            assert!(
                energy <= prev_energy * (1.0 + 1e-9),
                "energy grew: {prev_energy} -> {energy}"
            );
            prev_energy = energy;
        }
    }

    #[test]
    fn finite_propagation_speed() {
        // Support radius grows at most (1 + O(dx)) per unit time.
        let grid = RadialGrid::new(6.0, 0.02);
        let damping = DampingSpec::power(0.0, 0.0).unwrap();
        let mut stepper = WaveStepper::new(&grid, 1, 2.0, damping);
        let u0: Vec<f64> = grid.radii().map(|r| crate::testfn::phi(r)).collect();
        let u1: Vec<f64> = u0.clone();
        let dt = 0.018;
        let mut state = stepper.init_state(&u0, &u1, dt);
        let r_start = support_radius(&grid, &state.u_cur, 1e-12);
        while state.t < 2.0 {
            stepper.step(&mut state);
        }
        let r_end = support_radius(&grid, &state.u_cur, 1e-12);
        let speed = (r_end - r_start) / state.t;
        assert!(speed <= 1.0 + 5.0 * grid.dx(), "support speed {speed}");
    }

    #[test]
    fn trace_snapshot_times_strictly_increase() {
        let mut spec = bump_spec();
        spec.snapshot_dt = 0.25;
        spec.t_max = 3.0;
        let result = run(&spec).unwrap();
        let times: Vec<f64> = result.trace.snapshots.iter().map(|s| s.t).collect();
        assert!(times.len() > 5);
        assert!(times.windows(2).all(|w| w[1] > w[0]), "times {times:?}");
        assert!(result
            .trace
            .snapshots
            .iter()
            .all(|s| s.u.iter().all(|x| x.is_finite())));
    }
}
