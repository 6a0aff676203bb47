//! Lifespan-scaling experiments: run a family of amplitudes ε, estimate the
//! lifespan `T_ε` at two resolutions, fit `log T_ε = -s·log ε + c` over the
//! converged points, attach a bootstrap confidence interval, and compare the
//! fitted exponent against the predicted upper (`1/κ` or `p-1`) and lower
//! (`1/κ - δ`) rates.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::ln;
use crate::solver::{self, ProblemSpec, RunOutcome, SolverError};
use crate::theory::{self, ExponentReport, Regime, TheoryError};

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Amplitudes in (0, 1]; any order, typically geometric and descending.
    pub eps_grid: Vec<f64>,
    /// Two-resolution agreement required for a point to enter the fit.
    pub resolution_tol: f64,
    /// Minimum number of converged points for a fit.
    pub min_points: usize,
    /// Bootstrap resamples for the confidence interval.
    pub bootstrap_samples: usize,
    /// Bootstrap seed; fixed so identical configs give identical results.
    pub seed: u64,
    /// Reported loss `δ` in the lower-bound exponent `1/κ - δ`.
    pub delta: f64,
    /// Cap for the `t_max` doubling ladder.
    pub t_max_cap: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps_grid: alloc::vec![1.0, 0.7, 0.5, 0.35, 0.25],
            resolution_tol: 0.05,
            min_points: 4,
            bootstrap_samples: 1000,
            seed: 0x0D_A22,
            delta: 0.2,
            t_max_cap: 2000.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub epsilon: f64,
    /// Fine-resolution lifespan estimate; `+∞` when no blow-up was observed
    /// below the ladder cap.
    pub t_est: f64,
    pub converged: bool,
    /// Fine grid spacing used for `t_est`.
    pub dx: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingFit {
    /// `s` in `T_ε ~ ε^{-s}`.
    pub exponent: f64,
    pub intercept: f64,
    /// Bootstrap 95% interval for `s`.
    pub ci: (f64, f64),
    pub n_points: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub fit: ScalingFit,
    pub regime: ExponentReport,
    /// Exponent of the theorem's upper bound (`1/κ`, or `p-1` in the
    /// α-dominated cases).
    pub predicted_upper: f64,
    /// `1/κ - δ` from the lower-bound proposition.
    pub predicted_lower: f64,
    pub delta: f64,
    /// Lifespans non-increasing in ε across converged points; a violation
    /// flags resolution problems.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    /// Scaling fits require κ > 0.
    RegimeMismatch { regime: Regime },
    InsufficientConverged { got: usize, need: usize },
    EmptyGrid,
    EpsilonOutOfRange(f64),
    Solver(SolverError),
    Theory(TheoryError),
}

impl From<SolverError> for SweepError {
    fn from(e: SolverError) -> Self {
        Self::Solver(e)
    }
}

impl From<TheoryError> for SweepError {
    fn from(e: TheoryError) -> Self {
        Self::Theory(e)
    }
}

impl core::fmt::Display for SweepError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::RegimeMismatch { regime } => {
                write!(f, "scaling fit needs a subcritical regime, got {regime}")
            }
            Self::InsufficientConverged { got, need } => {
                write!(f, "only {got} converged points, need {need}")
            }
            Self::EmptyGrid => write!(f, "epsilon grid is empty"),
            Self::EpsilonOutOfRange(e) => write!(f, "epsilon = {e} outside (0, 1]"),
            Self::Solver(e) => write!(f, "{e}"),
            Self::Theory(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SweepError {}

/// Domain radius that keeps the data support causally separated from the
/// boundary until `t_max`.
fn domain_for(base: &ProblemSpec, t_max: f64) -> f64 {
    let support = base.data.support_radius().unwrap_or(base.domain_radius);
    (support + 1.02 * t_max + 4.0 * base.dx).max(base.domain_radius)
}

/// Lifespan of one amplitude: double `t_max` until the coarse run blows up,
/// then confirm at half the grid spacing. The returned point carries the
/// fine estimate and the two-resolution convergence flag.
pub fn lifespan_point(
    base: &ProblemSpec,
    epsilon: f64,
    cfg: &SweepConfig,
) -> Result<SweepPoint, SweepError> {
    if !(epsilon > 0.0) {
        return Err(SweepError::EpsilonOutOfRange(epsilon));
    }
    let mut spec = base.clone();
    spec.epsilon = epsilon;
    spec.snapshot_dt = 0.0; // sweeps need norms only

    let mut t_max = base.t_max;
    let coarse_report = loop {
        spec.t_max = t_max;
        spec.domain_radius = domain_for(base, t_max);
        match solver::run(&spec)?.outcome {
            RunOutcome::BlewUp(report) => break Some(report),
            RunOutcome::Completed { .. } => {
                if t_max >= cfg.t_max_cap {
                    break None;
                }
                t_max = (2.0 * t_max).min(cfg.t_max_cap);
            }
        }
    };
    let Some(coarse) = coarse_report else {
        return Ok(SweepPoint {
            epsilon,
            t_est: f64::INFINITY,
            converged: false,
            dx: spec.dx,
        });
    };

    // Fine confirmation run; retry once with a longer horizon if the finer
    // grid delays blow-up past the coarse horizon.
    let mut fine_spec = spec.clone();
    fine_spec.dx = 0.5 * spec.dx;
    let mut fine_outcome = solver::run(&fine_spec)?.outcome;
    if matches!(fine_outcome, RunOutcome::Completed { .. }) {
        fine_spec.t_max = 2.0 * spec.t_max;
        fine_spec.domain_radius = domain_for(base, fine_spec.t_max);
        fine_outcome = solver::run(&fine_spec)?.outcome;
    }
    Ok(match fine_outcome {
        RunOutcome::BlewUp(fine) => {
            let rel = (coarse.t_est - fine.t_est).abs() / fine.t_est.abs().max(1e-300);
            SweepPoint {
                epsilon,
                t_est: fine.t_est,
                converged: rel <= cfg.resolution_tol,
                dx: fine_spec.dx,
            }
        }
        RunOutcome::Completed { .. } => SweepPoint {
            epsilon,
            t_est: coarse.t_est,
            converged: false,
            dx: spec.dx,
        },
    })
}

/// Ordinary least squares of `ln T` on `ln ε`; returns `(s, intercept)` with
/// `s` the scaling exponent in `T ~ ε^{-s}`.
pub fn fit_scaling(epsilons: &[f64], lifespans: &[f64]) -> Option<(f64, f64)> {
    let n = epsilons.len();
    if n < 2 || lifespans.len() != n {
        return None;
    }
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let x = ln(epsilons[i]);
        let y = ln(lifespans[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let nf = n as f64;
    let denom = nf * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (nf * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / nf;
    Some((-slope, intercept))
}

/// Pairs-bootstrap 95% confidence interval for the fitted exponent.
pub fn bootstrap_ci(
    epsilons: &[f64],
    lifespans: &[f64],
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let n = epsilons.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(samples);
    let mut es = Vec::with_capacity(n);
    let mut ts = Vec::with_capacity(n);
    for _ in 0..samples {
        es.clear();
        ts.clear();
        for _ in 0..n {
            let k = rng.gen_range(0..n);
            es.push(epsilons[k]);
            ts.push(lifespans[k]);
        }
        if let Some((s, _)) = fit_scaling(&es, &ts) {
            if s.is_finite() {
                slopes.push(s);
            }
        }
    }
    if slopes.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pick = |frac: f64| {
        let idx = ((slopes.len() - 1) as f64 * frac) as usize;
        slopes[idx]
    };
    (pick(0.025), pick(0.975))
}

/// Run the sweep over `cfg.eps_grid` sequentially. Each point runs at two
/// resolutions; only converged points enter the fit.
pub fn run_sweep(base: &ProblemSpec, cfg: &SweepConfig) -> Result<SweepResult, SweepError> {
    if cfg.eps_grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    for &e in &cfg.eps_grid {
        if !(e > 0.0 && e <= 1.0) {
            return Err(SweepError::EpsilonOutOfRange(e));
        }
    }
    let regime = theory::classify(base.n, base.p, &base.damping)?;
    if regime.kappa <= 0.0 {
        return Err(SweepError::RegimeMismatch {
            regime: regime.regime,
        });
    }
    let mut points = Vec::with_capacity(cfg.eps_grid.len());
    for &eps in &cfg.eps_grid {
        points.push(lifespan_point(base, eps, cfg)?);
    }
    assemble_sweep(points, regime, base.p, cfg)
}

/// Fit and predictions from already-computed points (the CLI runs points in
/// parallel and then reduces here).
pub fn assemble_sweep(
    points: Vec<SweepPoint>,
    regime: ExponentReport,
    p: f64,
    cfg: &SweepConfig,
) -> Result<SweepResult, SweepError> {
    let usable: Vec<&SweepPoint> = points
        .iter()
        .filter(|pt| pt.converged && pt.t_est.is_finite())
        .collect();
    if usable.len() < cfg.min_points {
        return Err(SweepError::InsufficientConverged {
            got: usable.len(),
            need: cfg.min_points,
        });
    }
    // Monotonicity audit: larger amplitude must not lengthen the lifespan.
    let mut sorted: Vec<&SweepPoint> = usable.clone();
    sorted.sort_by(|a, b| a.epsilon.partial_cmp(&b.epsilon).unwrap());
    let monotone = sorted.windows(2).all(|w| w[1].t_est <= w[0].t_est * 1.001);

    let n_usable = usable.len();
    let es: Vec<f64> = usable.iter().map(|pt| pt.epsilon).collect();
    let ts: Vec<f64> = usable.iter().map(|pt| pt.t_est).collect();
    let (exponent, intercept) =
        fit_scaling(&es, &ts).ok_or(SweepError::InsufficientConverged {
            got: n_usable,
            need: cfg.min_points,
        })?;
    let ci = bootstrap_ci(&es, &ts, cfg.bootstrap_samples, cfg.seed);

    let predicted_upper = match regime.regime {
        Regime::SubcriticalPower => 1.0 / regime.kappa,
        _ => p - 1.0,
    };
    let predicted_lower = 1.0 / regime.kappa - cfg.delta;

    Ok(SweepResult {
        points,
        fit: ScalingFit {
            exponent,
            intercept,
            ci,
            n_points: n_usable,
        },
        regime,
        predicted_upper,
        predicted_lower,
        delta: cfg.delta,
        monotone,
    })
}

/// Verdict of the bound comparison.
#[derive(Debug, Clone, Copy)]
pub struct BoundVerdict {
    pub fit_exponent: f64,
    pub predicted_upper: f64,
    pub predicted_lower: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub consistent: bool,
    /// In the α-dominated regimes both candidate exponents are reported
    /// (`1/κ`, `p-1`) without any sharpness claim.
    pub alpha_candidates: Option<(f64, f64)>,
    /// The fitted power law ignores the `(log ε^{-1})^{p-1}` correction of
    /// the α-log-critical case.
    pub log_correction: bool,
}

/// Compare the fitted exponent against the predicted bracket with relative
/// slack `tol`.
pub fn compare_bounds(result: &SweepResult, tol: f64, p: f64) -> BoundVerdict {
    let s = result.fit.exponent;
    let upper_ok = s <= result.predicted_upper * (1.0 + tol);
    let lower_ok = s >= result.predicted_lower * (1.0 - tol);
    let alpha_candidates = match result.regime.regime {
        Regime::AlphaLogCritical | Regime::AlphaDominated => {
            Some((1.0 / result.regime.kappa, p - 1.0))
        }
        _ => None,
    };
    BoundVerdict {
        fit_exponent: s,
        predicted_upper: result.predicted_upper,
        predicted_lower: result.predicted_lower,
        upper_ok,
        lower_ok,
        consistent: upper_ok && lower_ok,
        alpha_candidates,
        log_correction: result.regime.regime == Regime::AlphaLogCritical,
    }
}
