//! `certify`: replay a recorded trace through the weak-form quadratures.
//! Reads `manifest.json`, `trace.csv` and `report.json` from a prior
//! `simulate` output directory, scans `J_R` for the saturation radius,
//! evaluates certificates on a τ-family, and writes `certificate.csv` plus
//! `chain.json`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::artifacts::{self, OutputGuard};
use crate::commands::simulate::OutcomeJson;
use crate::config::ResolvedConfig;
use dwlab_core::certify::{self, Certificate};
use dwlab_core::solver::{self, SolutionTrace};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainJson {
    pub r0: f64,
    pub tau0: f64,
    pub j_limit: f64,
    pub scan_radii: Vec<f64>,
    pub scan_j: Vec<f64>,
    pub applicable: bool,
    pub c1_values: Vec<f64>,
    pub c1_spread: f64,
    pub c_feasible: Vec<f64>,
    pub c_empirical: Vec<f64>,
    pub residuals: Vec<f64>,
    pub taus: Vec<f64>,
    pub radii: Vec<f64>,
    /// τ values below τ0 sit outside the regime where `R(τ) > R0` is
    /// guaranteed; they are still evaluated but flagged here.
    pub taus_below_tau0: usize,
}

#[derive(Debug, Serialize)]
pub struct CertifySummary {
    pub n_certificates: usize,
    pub max_residual: f64,
    pub chain: ChainJson,
    pub out_dir: PathBuf,
}

/// Rebuild the in-memory trace from a simulate output directory.
pub fn load_trace(dir: &Path) -> Result<(SolutionTrace, ResolvedConfig, OutcomeJson)> {
    let manifest = artifacts::read_manifest(dir)?;
    let sim_cfg = manifest.config;
    if sim_cfg.stride <= 0.0 {
        bail!(
            "{} was produced with stride = 0 (norms only); certify needs snapshots",
            dir.display()
        );
    }
    let spec = sim_cfg.problem_spec()?;
    let data = solver::make_initial_data(&spec).map_err(|e| anyhow::anyhow!("data: {e}"))?;
    let grid = spec.grid();
    let snapshots = artifacts::read_trace_csv(&dir.join("trace.csv"), grid.len())?;
    if snapshots.is_empty() {
        bail!("{} contains no snapshots", dir.join("trace.csv").display());
    }
    let outcome: OutcomeJson = artifacts::read_json(&dir.join("report.json"))?;
    let trace = SolutionTrace {
        grid,
        n: spec.n,
        p: spec.p,
        damping: spec.damping,
        epsilon: spec.epsilon,
        equation: spec.equation,
        u0: data.u0,
        u1: data.u1,
        condition_integral: data.condition_integral,
        snapshots,
        dt_history: Vec::new(),
        norms: Vec::new(),
    };
    Ok((trace, sim_cfg, outcome))
}

pub fn cmd_certify(cfg: &ResolvedConfig, trace_dir: &Path) -> Result<CertifySummary> {
    let (trace, _sim_cfg, outcome) = load_trace(trace_dir)?;
    let t_ref = match outcome {
        OutcomeJson::BlowUp { t_est, .. } => t_est,
        OutcomeJson::Completed { t_end } => t_end,
    };
    let t_last = trace.snapshots.last().unwrap().t;
    let (alpha, beta) = (trace.damping.alpha(), trace.damping.beta());

    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut guard = OutputGuard::new();
    artifacts::write_manifest(&cfg.out, cfg, &mut guard)?;

    // Radius scan on a geometric grid reaching past the coupling radius.
    let r_top = certify::choose_r(t_ref.max(1.0), trace.n, trace.p, alpha, beta)
        .max(trace.grid.domain_radius())
        .max(2.0);
    let mut radii = vec![0.5];
    while *radii.last().unwrap() < 2.0 * r_top {
        let next = radii.last().unwrap() * 1.5;
        radii.push(next);
    }
    let scan = certify::scan_r0(&trace, &radii).map_err(|e| anyhow::anyhow!("scan: {e}"))?;
    let tau0 = certify::tau_floor(scan.r0, alpha, beta);

    let mut certs: Vec<Certificate> = Vec::new();
    let mut taus = Vec::new();
    let mut cert_radii = Vec::new();
    let mut below = 0usize;
    for &frac in &cfg.tau_fracs {
        let tau = (frac * t_ref).min(t_last);
        if tau <= 0.0 {
            continue;
        }
        if tau < tau0 {
            below += 1;
        }
        let radius = certify::choose_r(tau, trace.n, trace.p, alpha, beta).max(scan.r0);
        let cert = certify::eval_i_and_k(&trace, tau, radius)
            .map_err(|e| anyhow::anyhow!("certificate at tau = {tau}: {e}"))?;
        taus.push(tau);
        cert_radii.push(radius);
        certs.push(cert);
    }
    if certs.is_empty() {
        bail!("no usable tau values (tau_fracs = {:?})", cfg.tau_fracs);
    }

    // Optional literal-form D column for comparison with the printed
    // definition.
    let d_override: Option<Vec<f64>> = if cfg.literal_d {
        let mut ds = Vec::with_capacity(certs.len());
        for c in &certs {
            ds.push(
                certify::eval_d(c.tau, c.r, trace.n, trace.p, &trace.damping, true)
                    .map_err(|e| anyhow::anyhow!("literal D: {e}"))?,
            );
        }
        Some(ds)
    } else {
        None
    };

    let q = trace.p / (trace.p - 1.0);
    let chain_report = certify::check_chain(&certs, trace.epsilon, q);
    let chain = ChainJson {
        r0: scan.r0,
        tau0,
        j_limit: scan.j_limit,
        scan_radii: scan.radii.clone(),
        scan_j: scan.j_values.clone(),
        applicable: chain_report.applicable,
        c1_values: chain_report.c1_values.clone(),
        c1_spread: chain_report.c1_spread,
        c_feasible: chain_report.c_feasible.clone(),
        c_empirical: chain_report.c_empirical.clone(),
        residuals: certs.iter().map(|c| c.identity_residual).collect(),
        taus,
        radii: cert_radii,
        taus_below_tau0: below,
    };

    artifacts::write_certificates_csv(&cfg.out, &certs, d_override.as_deref(), &mut guard)?;
    artifacts::write_json(&cfg.out, "chain.json", &chain, &mut guard)?;
    guard.commit();

    let max_residual = chain
        .residuals
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    Ok(CertifySummary {
        n_certificates: certs.len(),
        max_residual,
        chain,
        out_dir: cfg.out.clone(),
    })
}
