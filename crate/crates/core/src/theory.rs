//! Closed-form scalar objects of the blow-up analysis: admissible damping
//! coefficients, the lifespan exponent κ, critical exponents, the gauge
//! `g(t)` with its normalisation constant `B`, the radial weight `F_{p,α}`,
//! and the three-case lifespan predictor.

use crate::math::{exp, ln, powf};
use crate::quad::adaptive_simpson_rel;

/// Upper cutoff for the exponentially weighted integrals behind `B` and
/// `g(t)`; `e^{-200}` times any polynomial weight arising for β ∈ (-1, 1)
/// is far below double precision.
const TAIL_CUT: f64 = 200.0;

/// Relative tolerance equality used for exact-case dispatch (p on a critical
/// boundary, αq = n).
const BRANCH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum TheoryError {
    /// α must lie in [0, 1).
    AlphaOutOfRange(f64),
    /// β must lie in (-1, 1).
    BetaOutOfRange(f64),
    /// The closed-form layer requires the explicit power coefficient with
    /// αβ = 0 (the hypotheses of the lifespan theorem).
    NotTheoremMode { alpha: f64, beta: f64 },
    /// p must be > 1.
    ExponentOutOfRange(f64),
    /// The predictor only covers subcritical exponents p < 1 + 2/(n-α).
    Supercritical { p: f64, p_crit: f64 },
    /// ε must lie in (0, 1].
    EpsilonOutOfRange(f64),
    /// Radius arguments must be positive.
    RadiusOutOfRange(f64),
}

impl core::fmt::Display for TheoryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::AlphaOutOfRange(a) => write!(f, "alpha = {a} outside [0, 1)"),
            Self::BetaOutOfRange(b) => write!(f, "beta = {b} outside (-1, 1)"),
            Self::NotTheoremMode { alpha, beta } => write!(
                f,
                "damping (alpha = {alpha}, beta = {beta}) is outside theorem mode (needs explicit power coefficient with alpha*beta = 0)"
            ),
            Self::ExponentOutOfRange(p) => write!(f, "p = {p} must be > 1"),
            Self::Supercritical { p, p_crit } => {
                write!(f, "p = {p} is supercritical (p_c = {p_crit})")
            }
            Self::EpsilonOutOfRange(e) => write!(f, "epsilon = {e} outside (0, 1]"),
            Self::RadiusOutOfRange(r) => write!(f, "radius = {r} must be positive"),
        }
    }
}

impl core::error::Error for TheoryError {}

/// How the damping coefficient `Φ(t, x)` is built.
#[derive(Debug, Clone, Copy)]
pub enum DampingMode {
    /// `Φ(t,x) = <x>^{-α} (1+t)^{-β}`.
    ExplicitPower,
    /// `Φ(t,x) = a(|x|)` for a user-supplied spatial profile (time factor 1).
    GeneralSpatial(fn(f64) -> f64),
    /// `Φ(t,x) = b(t)` for a user-supplied temporal profile (space factor 1).
    GeneralTemporal(fn(f64) -> f64),
}

/// Damping coefficient family `Φ(t,x) = <x>^{-α}(1+t)^{-β}`, plus the
/// general-coefficient hooks (a continuous spatial profile or a smooth
/// temporal profile replacing one power factor).
#[derive(Debug, Clone, Copy)]
pub struct DampingSpec {
    alpha: f64,
    beta: f64,
    mode: DampingMode,
}

impl DampingSpec {
    /// Explicit power coefficient. Requires α ∈ [0, 1) and β ∈ (-1, 1);
    /// the endpoints are rejected rather than extrapolated.
    pub fn power(alpha: f64, beta: f64) -> Result<Self, TheoryError> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(TheoryError::AlphaOutOfRange(alpha));
        }
        if !(-1.0 < beta && beta < 1.0) {
            return Err(TheoryError::BetaOutOfRange(beta));
        }
        Ok(Self {
            alpha,
            beta,
            mode: DampingMode::ExplicitPower,
        })
    }

    /// Purely spatial coefficient `Φ = a(|x|)` with `0 ≤ a(r) ≲ <r>^{-α}`;
    /// `alpha` records the comparison exponent used by the classifiers.
    pub fn general_spatial(alpha: f64, a: fn(f64) -> f64) -> Result<Self, TheoryError> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(TheoryError::AlphaOutOfRange(alpha));
        }
        Ok(Self {
            alpha,
            beta: 0.0,
            mode: DampingMode::GeneralSpatial(a),
        })
    }

    /// Purely temporal coefficient `Φ = b(t)` with `b(t) ~ (1+t)^{-β}`.
    pub fn general_temporal(beta: f64, b: fn(f64) -> f64) -> Result<Self, TheoryError> {
        if !(-1.0 < beta && beta < 1.0) {
            return Err(TheoryError::BetaOutOfRange(beta));
        }
        Ok(Self {
            alpha: 0.0,
            beta,
            mode: DampingMode::GeneralTemporal(b),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mode(&self) -> DampingMode {
        self.mode
    }

    /// True when the coefficient satisfies the hypotheses of the lifespan
    /// theorem: explicit power form with αβ = 0.
    pub fn theorem_mode(&self) -> bool {
        matches!(self.mode, DampingMode::ExplicitPower) && self.alpha * self.beta == 0.0
    }

    /// Spatial factor of `Φ` at radius `r`.
    pub fn spatial_factor(&self, r: f64) -> f64 {
        match self.mode {
            DampingMode::ExplicitPower => {
                if self.alpha == 0.0 {
                    1.0
                } else {
                    powf(crate::math::bracket(r), -self.alpha)
                }
            }
            DampingMode::GeneralSpatial(a) => a(r),
            DampingMode::GeneralTemporal(_) => 1.0,
        }
    }

    /// Temporal factor of `Φ` at time `t`.
    pub fn temporal_factor(&self, t: f64) -> f64 {
        match self.mode {
            DampingMode::ExplicitPower => {
                if self.beta == 0.0 {
                    1.0
                } else {
                    powf(1.0 + t, -self.beta)
                }
            }
            DampingMode::GeneralSpatial(_) => 1.0,
            DampingMode::GeneralTemporal(b) => b(t),
        }
    }

    /// Full coefficient `Φ(t, r)`.
    pub fn phi(&self, t: f64, r: f64) -> f64 {
        self.spatial_factor(r) * self.temporal_factor(t)
    }

    fn require_theorem_mode(&self) -> Result<(), TheoryError> {
        if self.theorem_mode() {
            Ok(())
        } else {
            Err(TheoryError::NotTheoremMode {
                alpha: self.alpha,
                beta: self.beta,
            })
        }
    }
}

/// Which case of the lifespan theorem an exponent triple falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// p ≥ 1 + 2/(n-α): small-data solutions are expected to be global.
    Supercritical,
    /// 1 + α/(n-α) < p < 1 + 2/(n-α): lifespan bound ε^{-1/κ}.
    SubcriticalPower,
    /// p = 1 + α/(n-α) with α > 0 (equivalently αq = n): logarithmic
    /// correction ε^{-(p-1)} (log ε^{-1})^{p-1}.
    AlphaLogCritical,
    /// 1 < p < 1 + α/(n-α) with α > 0: bound ε^{-(p-1)}.
    AlphaDominated,
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            Self::Supercritical => "supercritical",
            Self::SubcriticalPower => "subcritical-power",
            Self::AlphaLogCritical => "alpha-log-critical",
            Self::AlphaDominated => "alpha-dominated",
        };
        f.write_str(s)
    }
}

/// Report of all closed-form exponents attached to a parameter triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentReport {
    /// κ = 2(1+β)/(2-α) · (1/(p-1) - (n-α)/2); positive iff subcritical.
    pub kappa: f64,
    /// Critical exponent 1 + 2/(n-α).
    pub p_crit: f64,
    /// Case boundary 1 + α/(n-α) (trivially 1 when α = 0).
    pub p_alpha: f64,
    /// Fujita exponent 1 + 2/n of the underlying heat equation.
    pub p_fujita: f64,
    /// Case of the lifespan theorem.
    pub regime: Regime,
    /// Hölder conjugate q = p/(p-1).
    pub q: f64,
}

fn require_exponent(p: f64) -> Result<(), TheoryError> {
    if p > 1.0 {
        Ok(())
    } else {
        Err(TheoryError::ExponentOutOfRange(p))
    }
}

/// Lifespan exponent κ of the subcritical regime.
///
/// May be ≤ 0 (at or above the critical exponent); callers classify.
pub fn kappa(n: u32, p: f64, damping: &DampingSpec) -> Result<f64, TheoryError> {
    damping.require_theorem_mode()?;
    require_exponent(p)?;
    let (alpha, beta) = (damping.alpha(), damping.beta());
    let nf = n as f64;
    Ok(2.0 * (1.0 + beta) / (2.0 - alpha) * (1.0 / (p - 1.0) - 0.5 * (nf - alpha)))
}

/// Classify `(n, p, α, β)` into the case table of the lifespan theorem.
pub fn classify(n: u32, p: f64, damping: &DampingSpec) -> Result<ExponentReport, TheoryError> {
    let k = kappa(n, p, damping)?;
    let (alpha, _beta) = (damping.alpha(), damping.beta());
    let nf = n as f64;
    let p_crit = 1.0 + 2.0 / (nf - alpha);
    let p_alpha = 1.0 + alpha / (nf - alpha);
    let q = p / (p - 1.0);

    let close = |a: f64, b: f64| (a - b).abs() <= BRANCH_EPS * a.abs().max(b.abs()).max(1.0);
    let regime = if p >= p_crit && !close(p, p_crit) {
        Regime::Supercritical
    } else if close(p, p_crit) {
        // κ = 0 boundary counts as supercritical for the predictor: the
        // polynomial bounds below do not apply there.
        Regime::Supercritical
    } else if alpha > 0.0 && close(alpha * q, nf) {
        Regime::AlphaLogCritical
    } else if alpha > 0.0 && p < p_alpha {
        Regime::AlphaDominated
    } else {
        Regime::SubcriticalPower
    };

    Ok(ExponentReport {
        kappa: k,
        p_crit,
        p_alpha,
        p_fujita: 1.0 + 2.0 / nf,
        regime,
        q,
    })
}

fn require_beta(beta: f64) -> Result<(), TheoryError> {
    if -1.0 < beta && beta < 1.0 {
        Ok(())
    } else {
        Err(TheoryError::BetaOutOfRange(beta))
    }
}

/// Weighted tail integral `∫_t^∞ exp(-(G(τ) - G(t))) dτ` with
/// `G(t) = ((1+t)^{1-β} - 1)/(1-β)` the antiderivative of `(1+s)^{-β}`.
///
/// Substituting `v = G(t+s) - G(t)` turns this into
/// `∫_0^∞ e^{-v} ((1+t)^{1-β} + (1-β)v)^{β/(1-β)} dv`,
/// which is uniformly well-conditioned in `t` (no large exponentials), so a
/// single quadrature covers both `B` and the gauge.
fn weighted_tail(beta: f64, t: f64) -> f64 {
    let c = 1.0 - beta;
    let base = powf(1.0 + t, c);
    let w_exp = beta / c;
    adaptive_simpson_rel(
        &|v: f64| exp(-v) * powf(base + c * v, w_exp),
        0.0,
        TAIL_CUT,
        1e-12,
    )
}

/// The normalisation constant
/// `B = (∫_0^∞ exp(-∫_0^t (1+s)^{-β} ds) dt)^{-1}`, evaluated to a relative
/// accuracy of about 1e-10. The inner integral is the closed form
/// `((1+t)^{1-β} - 1)/(1-β)`.
pub fn compute_b(beta: f64) -> Result<f64, TheoryError> {
    require_beta(beta)?;
    Ok(1.0 / weighted_tail(beta, 0.0))
}

/// The gauge `g(t)` solving `-g'(t) + (1+t)^{-β} g(t) = 1`, `g(0) = B^{-1}`.
///
/// Values come from the tail representation
/// `g(t) = e^{G(t)} ∫_t^∞ e^{-G(τ)} dτ`, which is algebraically identical to
/// the textbook variation-of-constants formula but free of the catastrophic
/// cancellation that formula suffers once `G(t)` is large.
#[derive(Debug, Clone, Copy)]
pub struct Gauge {
    beta: f64,
    b: f64,
}

pub fn gauge(beta: f64) -> Result<Gauge, TheoryError> {
    let b = compute_b(beta)?;
    Ok(Gauge { beta, b })
}

impl Gauge {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The constant `B` with `g(0) = B^{-1}`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `g(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if self.beta == 0.0 {
            return 1.0;
        }
        weighted_tail(self.beta, t)
    }

    /// `g'(t)` by a second-order difference quotient of the tail
    /// representation, step `h = 1e-5 (1+t)`.
    ///
    /// This route is numerically independent of the ODE identity
    /// `g' = (1+t)^{-β} g - 1`, so the pair (`eval`, `eval_deriv`) supports a
    /// genuine two-sided residual check of the defining equation. Difference
    /// and quadrature noise combine to roughly 1e-7 absolute, well under the
    /// 1e-6 residual budget.
    pub fn eval_deriv(&self, t: f64) -> f64 {
        if self.beta == 0.0 {
            return 0.0;
        }
        let h = 1e-5 * (1.0 + t);
        if t >= h {
            (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
        } else {
            (-3.0 * self.eval(t) + 4.0 * self.eval(t + h) - self.eval(t + 2.0 * h)) / (2.0 * h)
        }
    }

    /// Residual of the defining ODE, `-g'(t) + (1+t)^{-β} g(t) - 1`, with
    /// `g` and `g'` evaluated through their independent quadrature routes.
    pub fn ode_residual(&self, t: f64) -> f64 {
        -self.eval_deriv(t) + powf(1.0 + t, -self.beta) * self.eval(t) - 1.0
    }
}

/// The radial weight
/// `F_{p,α}(R) = R^{-α+n/q}` (αq < n), `(log(1+R))^{1/q}` (αq = n), `1` (αq > n).
pub fn f_weight(p: f64, alpha: f64, n: u32, r: f64) -> Result<f64, TheoryError> {
    require_exponent(p)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(TheoryError::AlphaOutOfRange(alpha));
    }
    if r <= 0.0 {
        return Err(TheoryError::RadiusOutOfRange(r));
    }
    let q = p / (p - 1.0);
    let nf = n as f64;
    let aq = alpha * q;
    let close = (aq - nf).abs() <= BRANCH_EPS * nf.max(1.0);
    Ok(if close {
        powf(libm::log1p(r), 1.0 / q)
    } else if aq < nf {
        powf(r, -alpha + nf / q)
    } else {
        1.0
    })
}

/// Shape of a predicted lifespan upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundForm {
    /// `ε^{-1/κ}`.
    KappaPower,
    /// `ε^{-(p-1)} (log ε^{-1})^{p-1}`.
    AlphaCriticalLog,
    /// `ε^{-(p-1)}`.
    AlphaDominatedPower,
}

impl core::fmt::Display for BoundForm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            Self::KappaPower => "eps^(-1/kappa)",
            Self::AlphaCriticalLog => "eps^(-(p-1)) * (log(1/eps))^(p-1)",
            Self::AlphaDominatedPower => "eps^(-(p-1))",
        };
        f.write_str(s)
    }
}

/// Predicted lifespan upper bound with unit constant. All constants `C` in
/// the bound table are unknowable from the analysis; they are reported as 1
/// and only exponents are ever compared against experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifespanBound {
    pub form: BoundForm,
    pub value: f64,
}

/// Evaluate the three-case lifespan bound table at amplitude ε ∈ (0, 1].
pub fn predict_lifespan_bound(
    n: u32,
    p: f64,
    damping: &DampingSpec,
    epsilon: f64,
) -> Result<LifespanBound, TheoryError> {
    let report = classify(n, p, damping)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(TheoryError::EpsilonOutOfRange(epsilon));
    }
    match report.regime {
        Regime::Supercritical => Err(TheoryError::Supercritical {
            p,
            p_crit: report.p_crit,
        }),
        Regime::SubcriticalPower => Ok(LifespanBound {
            form: BoundForm::KappaPower,
            value: powf(epsilon, -1.0 / report.kappa),
        }),
        Regime::AlphaLogCritical => Ok(LifespanBound {
            form: BoundForm::AlphaCriticalLog,
            value: powf(epsilon, -(p - 1.0)) * powf(ln(1.0 / epsilon), p - 1.0),
        }),
        Regime::AlphaDominated => Ok(LifespanBound {
            form: BoundForm::AlphaDominatedPower,
            value: powf(epsilon, -(p - 1.0)),
        }),
    }
}
