//! `simulate`: one solver run; writes `manifest.json`, `norms.csv`,
//! `trace.csv` (when the stride is positive), and `report.json`.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::artifacts::{self, OutputGuard};
use crate::config::ResolvedConfig;
use dwlab_core::solver::{self, BlowupMethod, RunOutcome};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OutcomeJson {
    BlowUp {
        t_est: f64,
        t_lower: f64,
        t_upper: f64,
        method: String,
        converged: bool,
        resolution_pair: Option<(f64, f64, f64, f64)>,
    },
    Completed {
        t_end: f64,
    },
}

impl From<&RunOutcome> for OutcomeJson {
    fn from(outcome: &RunOutcome) -> Self {
        match outcome {
            RunOutcome::BlewUp(r) => OutcomeJson::BlowUp {
                t_est: r.t_est,
                t_lower: r.t_lower,
                t_upper: r.t_upper,
                method: match r.method {
                    BlowupMethod::ThresholdExtrapolation => "threshold-extrapolation".into(),
                    BlowupMethod::DtCollapse => "dt-collapse".into(),
                },
                converged: r.converged,
                resolution_pair: r.resolution_pair,
            },
            RunOutcome::Completed { t_end } => OutcomeJson::Completed { t_end: *t_end },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub outcome: OutcomeJson,
    pub snapshots: usize,
    pub out_dir: PathBuf,
}

pub fn cmd_simulate(cfg: &ResolvedConfig) -> Result<SimulateSummary> {
    let spec = cfg.problem_spec()?;
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut guard = OutputGuard::new();

    let result = if cfg.refine {
        solver::run_converged(&spec, cfg.resolution_tol)
    } else {
        solver::run(&spec)
    }
    .map_err(|e| anyhow::anyhow!("solver: {e}"))?;

    artifacts::write_manifest(&cfg.out, cfg, &mut guard)?;
    artifacts::write_norms_csv(&cfg.out, &result.trace.norms, &mut guard)?;
    if cfg.stride > 0.0 {
        artifacts::write_trace_csv(&cfg.out, &result.trace, &mut guard)?;
    }
    let outcome = OutcomeJson::from(&result.outcome);
    artifacts::write_json(&cfg.out, "report.json", &outcome, &mut guard)?;
    guard.commit();

    Ok(SimulateSummary {
        outcome,
        snapshots: result.trace.snapshots.len(),
        out_dir: cfg.out.clone(),
    })
}
