//! `sweep`: lifespan scaling over an amplitude grid. Points run in parallel
//! (bounded worker pool), are checkpointed as `point_XXX.json` for resume,
//! and a single reduction produces `sweep.csv`, `loglog.dat`, and
//! `summary.json`.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{self, OutputGuard};
use crate::config::ResolvedConfig;
use dwlab_core::sweep::{self, SweepConfig, SweepPoint};
use dwlab_core::theory;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointJson {
    pub epsilon: f64,
    pub t_est: f64,
    pub converged: bool,
    pub dx: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictJson {
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub consistent: bool,
    pub alpha_candidates: Option<(f64, f64)>,
    pub log_correction: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub fit_exponent: f64,
    pub fit_ci: (f64, f64),
    pub fit_points: usize,
    pub predicted_upper: f64,
    pub predicted_lower: f64,
    pub delta: f64,
    pub kappa: f64,
    pub regime: String,
    pub monotone: bool,
    pub verdict: VerdictJson,
    pub n_points: usize,
    pub n_skipped: usize,
}

fn sweep_config(cfg: &ResolvedConfig) -> SweepConfig {
    SweepConfig {
        eps_grid: cfg.eps_grid.clone(),
        resolution_tol: cfg.resolution_tol,
        min_points: 4,
        bootstrap_samples: cfg.bootstrap,
        seed: cfg.seed,
        delta: cfg.delta,
        t_max_cap: cfg.tmax_cap,
    }
}

/// Resume comparisons ignore presentation-only fields.
fn resume_key(cfg: &ResolvedConfig) -> ResolvedConfig {
    ResolvedConfig {
        workers: 0,
        json: false,
        out: PathBuf::new(),
        ..cfg.clone()
    }
}

pub fn cmd_sweep(cfg: &ResolvedConfig) -> Result<SweepSummary> {
    let base = cfg.problem_spec()?;
    let sweep_cfg = sweep_config(cfg);
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating {}", cfg.out.display()))?;

    // Manifest is the resume token: refuse to mix results across configs.
    let manifest_path = cfg.out.join("manifest.json");
    if manifest_path.exists() {
        let existing = artifacts::read_manifest(&cfg.out)?;
        if resume_key(&existing.config) != resume_key(cfg) {
            bail!(
                "{} holds results for a different configuration; use a fresh --out",
                cfg.out.display()
            );
        }
    } else {
        let mut guard = OutputGuard::new();
        artifacts::write_manifest(&cfg.out, cfg, &mut guard)?;
        guard.commit();
    }

    // Load checkpoints; compute the missing points in parallel.
    let point_path = |idx: usize| cfg.out.join(format!("point_{idx:03}.json"));
    let mut points: Vec<Option<SweepPoint>> = Vec::new();
    let mut n_skipped = 0usize;
    for (idx, _eps) in cfg.eps_grid.iter().enumerate() {
        let path = point_path(idx);
        if path.exists() {
            let p: PointJson = artifacts::read_json(&path)?;
            points.push(Some(SweepPoint {
                epsilon: p.epsilon,
                t_est: p.t_est,
                converged: p.converged,
                dx: p.dx,
            }));
            n_skipped += 1;
        } else {
            points.push(None);
        }
    }

    let todo: Vec<(usize, f64)> = cfg
        .eps_grid
        .iter()
        .enumerate()
        .filter(|(idx, _)| points[*idx].is_none())
        .map(|(idx, &eps)| (idx, eps))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("building worker pool")?;
    let computed: Vec<(usize, Result<SweepPoint, sweep::SweepError>)> = pool.install(|| {
        todo.par_iter()
            .map(|&(idx, eps)| (idx, sweep::lifespan_point(&base, eps, &sweep_cfg)))
            .collect()
    });
    for (idx, outcome) in computed {
        let point = outcome.map_err(|e| anyhow::anyhow!("epsilon = {}: {e}", cfg.eps_grid[idx]))?;
        // Checkpoint immediately: completed amplitudes survive later failures.
        let mut guard = OutputGuard::new();
        artifacts::write_json(
            &cfg.out,
            &format!("point_{idx:03}.json"),
            &PointJson {
                epsilon: point.epsilon,
                t_est: point.t_est,
                converged: point.converged,
                dx: point.dx,
            },
            &mut guard,
        )?;
        guard.commit();
        points[idx] = Some(point);
    }
    let points: Vec<SweepPoint> = points.into_iter().map(Option::unwrap).collect();

    let regime = theory::classify(base.n, base.p, &base.damping)
        .map_err(|e| anyhow::anyhow!("classify: {e}"))?;
    let result = sweep::assemble_sweep(points, regime, base.p, &sweep_cfg)
        .map_err(|e| anyhow::anyhow!("sweep: {e}"))?;
    let verdict = sweep::compare_bounds(&result, cfg.tol, base.p);

    let mut guard = OutputGuard::new();
    artifacts::write_sweep_csv(&cfg.out, &result.points, &mut guard)?;
    artifacts::write_loglog_dat(&cfg.out, &result.points, &mut guard)?;
    let summary = SweepSummary {
        fit_exponent: result.fit.exponent,
        fit_ci: result.fit.ci,
        fit_points: result.fit.n_points,
        predicted_upper: result.predicted_upper,
        predicted_lower: result.predicted_lower,
        delta: result.delta,
        kappa: result.regime.kappa,
        regime: result.regime.regime.to_string(),
        monotone: result.monotone,
        verdict: VerdictJson {
            upper_ok: verdict.upper_ok,
            lower_ok: verdict.lower_ok,
            consistent: verdict.consistent,
            alpha_candidates: verdict.alpha_candidates,
            log_correction: verdict.log_correction,
        },
        n_points: result.points.len(),
        n_skipped,
    };
    artifacts::write_json(&cfg.out, "summary.json", &summary, &mut guard)?;
    guard.commit();
    Ok(summary)
}
