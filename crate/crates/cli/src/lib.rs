//! Command-line front end for the damped-wave lifespan laboratory:
//! `predict` (closed-form exponent tables), `simulate` (one solver run with
//! trace artifacts), `sweep` (lifespan scaling over an amplitude grid), and
//! `certify` (weak-form functionals replayed over a recorded trace).

pub mod artifacts;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{ConfigOverlay, ResolvedConfig};

#[derive(Debug, Parser)]
#[command(
    name = "dwlab",
    about = "Lifespan laboratory for the semilinear damped wave equation",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical exponents, κ, and the lifespan-bound case table.
    Predict(CommonArgs),
    /// Integrate one problem and write trace/norm artifacts.
    Simulate(CommonArgs),
    /// Lifespan scaling sweep over an amplitude grid.
    Sweep(CommonArgs),
    /// Weak-form certificates over a recorded trace.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file (flat key = value, or JSON); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Space dimension (radial reduction for n >= 2).
    #[arg(long)]
    pub n: Option<u32>,
    /// Nonlinearity exponent p > 1.
    #[arg(long)]
    pub p: Option<f64>,
    /// Spatial damping decay, alpha in [0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Temporal damping decay, beta in (-1, 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Data amplitude.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    pub dx: Option<f64>,
    /// Courant number.
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Time horizon.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Domain radius (0 = derive from the finite-speed rule).
    #[arg(long)]
    pub domain: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
    /// Allow damping outside the theorem hypotheses (alpha*beta != 0).
    #[arg(long)]
    pub exploratory: bool,
    /// Evaluate D(tau, R) with the literal printed exponent R^{q/n}.
    #[arg(long = "literal-D")]
    pub literal_d: bool,
    /// damped-wave | heat.
    #[arg(long)]
    pub equation: Option<String>,
    /// paper-bump | gaussian-truncated.
    #[arg(long = "data-family")]
    pub data_family: Option<String>,
    /// Bump radius of the paper-bump family.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Comma-separated amplitude grid for sweeps.
    #[arg(long = "eps-grid")]
    pub eps_grid: Option<String>,
    /// Snapshot interval (0 = norms only).
    #[arg(long)]
    pub stride: Option<f64>,
    /// Numerical blow-up threshold on sup|u|.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Comma-separated certificate times as fractions of the lifespan.
    #[arg(long = "tau-fracs")]
    pub tau_fracs: Option<String>,
    /// Two-resolution refinement for simulate.
    #[arg(long)]
    pub refine: bool,
    /// Bootstrap seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative tolerance for exponent comparisons.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory holding a prior `simulate` run (manifest + trace).
    #[arg(long)]
    pub trace: PathBuf,
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| anyhow::anyhow!("bad number {t:?}: {e}"))
        })
        .collect()
}

impl CommonArgs {
    fn overlay(&self) -> Result<ConfigOverlay> {
        Ok(ConfigOverlay {
            n: self.n,
            p: self.p,
            alpha: self.alpha,
            beta: self.beta,
            eps: self.eps,
            equation: self.equation.clone(),
            data_family: self.data_family.clone(),
            r0: self.r0,
            domain: self.domain,
            dx: self.dx,
            cfl: self.cfl,
            tmax: self.tmax,
            threshold: self.threshold,
            stride: self.stride,
            eps_grid: self.eps_grid.as_deref().map(parse_list).transpose()?,
            tau_fracs: self.tau_fracs.as_deref().map(parse_list).transpose()?,
            literal_d: self.literal_d.then_some(true),
            exploratory: self.exploratory.then_some(true),
            json: self.json.then_some(true),
            refine: self.refine.then_some(true),
            seed: self.seed,
            tol: self.tol,
            out: self.out.clone(),
            ..ConfigOverlay::default()
        })
    }

    pub fn resolve(&self, command: &str) -> Result<ResolvedConfig> {
        ResolvedConfig::resolve(command, self.config.as_deref(), &self.overlay()?)
    }
}

/// Dispatch a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Predict(args) => {
            let cfg = args.resolve("predict")?;
            let mut stdout = std::io::stdout().lock();
            commands::cmd_predict(&cfg, &mut stdout)?;
        }
        Command::Simulate(args) => {
            let cfg = args.resolve("simulate")?;
            let summary = commands::cmd_simulate(&cfg)?;
            if cfg.json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                match &summary.outcome {
                    commands::simulate::OutcomeJson::BlowUp {
                        t_est,
                        t_lower,
                        t_upper,
                        method,
                        converged,
                        ..
                    } => println!(
                        "blow-up: T_est = {t_est} in [{t_lower}, {t_upper}] ({method}, converged = {converged}); artifacts in {}",
                        summary.out_dir.display()
                    ),
                    commands::simulate::OutcomeJson::Completed { t_end } => println!(
                        "completed without blow-up to t = {t_end}; artifacts in {}",
                        summary.out_dir.display()
                    ),
                }
            }
        }
        Command::Sweep(args) => {
            let cfg = args.resolve("sweep")?;
            let summary = commands::cmd_sweep(&cfg)?;
            if cfg.json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                println!(
                    "sweep: fitted exponent s = {} (95% CI [{}, {}], {} points), predicted upper {} lower {}, consistent = {}; artifacts in {}",
                    summary.fit_exponent,
                    summary.fit_ci.0,
                    summary.fit_ci.1,
                    summary.fit_points,
                    summary.predicted_upper,
                    summary.predicted_lower,
                    summary.verdict.consistent,
                    cfg.out.display()
                );
            }
        }
        Command::Certify(args) => {
            let cfg = args.common.resolve("certify")?;
            let summary = commands::cmd_certify(&cfg, &args.trace)?;
            if cfg.json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                println!(
                    "certify: {} certificates, max residual {}, R0 = {}, tau0 = {}, C1 spread {}; artifacts in {}",
                    summary.n_certificates,
                    summary.max_residual,
                    summary.chain.r0,
                    summary.chain.tau0,
                    summary.chain.c1_spread,
                    summary.out_dir.display()
                );
            }
        }
    }
    Ok(())
}
