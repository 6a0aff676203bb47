//! `predict`: print the critical exponents, the lifespan-bound case table,
//! and the numeric κ/regime/bound evaluation for the given parameters.

use std::io::Write;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use crate::config::ResolvedConfig;
use dwlab_core::theory::{self, Regime};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub case: String,
    pub bound: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictReport {
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub eps: f64,
    pub p_crit: f64,
    pub p_fujita: f64,
    pub p_alpha: f64,
    pub q: f64,
    pub kappa: f64,
    pub regime: String,
    pub bound_form: Option<String>,
    pub bound_value: Option<f64>,
    /// Exponent of the almost-sharp lower bound `ε^{-1/κ+δ}`.
    pub lower_exponent: f64,
    pub delta: f64,
    pub table: Vec<TableRow>,
    pub kappa_formula: String,
}

pub fn build_report(cfg: &ResolvedConfig) -> Result<PredictReport> {
    if cfg.alpha * cfg.beta != 0.0 && !cfg.exploratory {
        bail!(
            "alpha*beta != 0 (alpha = {}, beta = {}) is outside the theorem; pass --exploratory to inspect the lower bound anyway",
            cfg.alpha,
            cfg.beta
        );
    }
    let damping = cfg.damping()?;
    let nf = cfg.n as f64;
    let (alpha, beta) = (cfg.alpha, cfg.beta);
    let p_crit = 1.0 + 2.0 / (nf - alpha);
    let p_alpha = 1.0 + alpha / (nf - alpha);
    let p_fujita = 1.0 + 2.0 / nf;
    let q = cfg.p / (cfg.p - 1.0);

    // κ is meaningful as an upper-bound exponent only in theorem mode, but
    // the lower bound uses the same formula for any αβ ≥ 0.
    let kappa = 2.0 * (1.0 + beta) / (2.0 - alpha) * (1.0 / (cfg.p - 1.0) - 0.5 * (nf - alpha));

    let mut table = Vec::new();
    if alpha > 0.0 {
        table.push(TableRow {
            case: format!("{p_alpha} < p < {p_crit}"),
            bound: "eps^(-1/kappa)".into(),
        });
        table.push(TableRow {
            case: format!("p = {p_alpha}"),
            bound: "eps^(-(p-1)) * (log(1/eps))^(p-1)".into(),
        });
        table.push(TableRow {
            case: format!("1 < p < {p_alpha}"),
            bound: "eps^(-(p-1))".into(),
        });
    } else {
        table.push(TableRow {
            case: format!("1 < p < {p_crit}"),
            bound: "eps^(-1/kappa)".into(),
        });
    }

    let (regime, bound_form, bound_value) = if damping.theorem_mode() {
        let report = theory::classify(cfg.n, cfg.p, &damping)?;
        match report.regime {
            Regime::Supercritical => ("supercritical".to_string(), None, None),
            _ => {
                let bound = theory::predict_lifespan_bound(cfg.n, cfg.p, &damping, cfg.eps)?;
                (
                    report.regime.to_string(),
                    Some(bound.form.to_string()),
                    Some(bound.value),
                )
            }
        }
    } else {
        ("outside-theorem (lower bound only)".to_string(), None, None)
    };

    Ok(PredictReport {
        n: cfg.n,
        alpha,
        beta,
        p: cfg.p,
        eps: cfg.eps,
        p_crit,
        p_fujita,
        p_alpha,
        q,
        kappa,
        regime,
        bound_form,
        bound_value,
        lower_exponent: 1.0 / kappa - cfg.delta,
        delta: cfg.delta,
        table,
        kappa_formula: "2(1+beta)/(2-alpha) * (1/(p-1) - (n-alpha)/2)".into(),
    })
}

pub fn cmd_predict(cfg: &ResolvedConfig, out: &mut dyn Write) -> Result<PredictReport> {
    let report = build_report(cfg)?;
    if cfg.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        writeln!(
            out,
            "lifespan prediction: n = {}, alpha = {}, beta = {}",
            report.n, report.alpha, report.beta
        )?;
        writeln!(out, "  p_c (critical)        = {}", report.p_crit)?;
        writeln!(out, "  p_F (Fujita, 1+2/n)   = {}", report.p_fujita)?;
        writeln!(out, "  p_a (1+alpha/(n-a))   = {}", report.p_alpha)?;
        writeln!(out, "  upper-bound table (T_eps <= C * bound, eps in (0,1]):")?;
        for row in &report.table {
            writeln!(out, "    {:<42} : {}", row.case, row.bound)?;
        }
        writeln!(out, "  lower bound: T_eps >= C * eps^(-1/kappa + delta)")?;
        writeln!(out, "  kappa = {}  [{}]", report.kappa, report.kappa_formula)?;
        writeln!(
            out,
            "  at p = {}: q = {}, regime = {}",
            report.p, report.q, report.regime
        )?;
        match (&report.bound_form, report.bound_value) {
            (Some(form), Some(value)) => {
                writeln!(
                    out,
                    "  bound at eps = {}: {form} = {value}  (C = 1 convention)",
                    report.eps
                )?;
            }
            _ => {
                writeln!(out, "  no polynomial upper bound at this p")?;
            }
        }
    }
    Ok(report)
}
