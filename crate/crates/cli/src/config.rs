//! Run configuration: defaults, config-file ingestion (flat `key = value`
//! text or JSON), and flag overlay. The fully resolved configuration is what
//! the manifest records and what every command consumes.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dwlab_core::solver::{DataFamily, Equation, ProblemSpec};
use dwlab_core::theory::DampingSpec;

/// Fully resolved configuration; serialized verbatim into `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub command: String,
    pub n: u32,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
    pub equation: String,
    pub data_family: String,
    pub r0: f64,
    pub sigma: f64,
    pub cutoff: f64,
    /// 0 = derive from `r0 + 1.02·tmax` (wave domain rule).
    pub domain: f64,
    pub dx: f64,
    pub cfl: f64,
    pub tmax: f64,
    pub threshold: f64,
    /// Snapshot interval; 0 = norms-only trace.
    pub stride: f64,
    pub eps_grid: Vec<f64>,
    /// Certificate times as fractions of the estimated lifespan.
    pub tau_fracs: Vec<f64>,
    pub literal_d: bool,
    pub exploratory: bool,
    pub json: bool,
    /// Two-resolution refinement for `simulate`.
    pub refine: bool,
    pub seed: u64,
    pub bootstrap: usize,
    pub resolution_tol: f64,
    /// Relative slack when comparing the fitted exponent to predictions.
    pub tol: f64,
    pub delta: f64,
    pub tmax_cap: f64,
    /// 0 = library default thread count.
    pub workers: usize,
    pub out: PathBuf,
    pub version: String,
}

impl Default for ResolvedConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            n: 1,
            p: 2.0,
            alpha: 0.0,
            beta: 0.0,
            eps: 1.0,
            equation: "damped-wave".into(),
            data_family: "paper-bump".into(),
            r0: 1.0,
            sigma: 0.5,
            cutoff: 1.5,
            domain: 0.0,
            dx: 0.02,
            cfl: 0.9,
            tmax: 40.0,
            threshold: 1e6,
            stride: 0.0,
            eps_grid: vec![1.0, 0.7, 0.5, 0.35, 0.25],
            tau_fracs: vec![0.25, 0.5, 0.75],
            literal_d: false,
            exploratory: false,
            json: false,
            refine: false,
            seed: 0x0D_A22,
            bootstrap: 1000,
            resolution_tol: 0.05,
            tol: 0.35,
            delta: 0.2,
            tmax_cap: 2000.0,
            workers: 0,
            out: PathBuf::from("out"),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Optional overrides collected from a config file or command-line flags.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverlay {
    pub n: Option<u32>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub equation: Option<String>,
    pub data_family: Option<String>,
    pub r0: Option<f64>,
    pub sigma: Option<f64>,
    pub cutoff: Option<f64>,
    pub domain: Option<f64>,
    pub dx: Option<f64>,
    pub cfl: Option<f64>,
    pub tmax: Option<f64>,
    pub threshold: Option<f64>,
    pub stride: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    pub tau_fracs: Option<Vec<f64>>,
    pub literal_d: Option<bool>,
    pub exploratory: Option<bool>,
    pub json: Option<bool>,
    pub refine: Option<bool>,
    pub seed: Option<u64>,
    pub bootstrap: Option<usize>,
    pub resolution_tol: Option<f64>,
    pub tol: Option<f64>,
    pub delta: Option<f64>,
    pub tmax_cap: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigOverlay {
    pub fn apply(&self, cfg: &mut ResolvedConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        set!(
            n, p, alpha, beta, eps, equation, data_family, r0, sigma, cutoff, domain, dx, cfl,
            tmax, threshold, stride, eps_grid, tau_fracs, literal_d, exploratory, json, refine,
            seed, bootstrap, resolution_tol, tol, delta, tmax_cap, workers, out
        );
    }
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {tok:?} in list"))
        })
        .collect()
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => bail!("bad boolean {other:?}"),
    }
}

/// Parse a config file: JSON when the first non-space byte is `{` or the
/// extension is `.json`, flat `key = value` lines otherwise (`#` comments).
pub fn load_config_file(path: &Path) -> Result<ConfigOverlay> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let is_json = path.extension().map(|e| e == "json").unwrap_or(false)
        || text.trim_start().starts_with('{');
    let mut pairs: Vec<(String, String)> = Vec::new();
    if is_json {
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let obj = value
            .as_object()
            .context("config JSON must be an object")?;
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            pairs.push((k.clone(), s));
        }
    } else {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    overlay_from_pairs(&pairs)
}

fn overlay_from_pairs(pairs: &[(String, String)]) -> Result<ConfigOverlay> {
    let mut o = ConfigOverlay::default();
    for (key, value) in pairs {
        let v = value.as_str();
        match key.replace('-', "_").as_str() {
            "n" => o.n = Some(v.parse()?),
            "p" => o.p = Some(v.parse()?),
            "alpha" => o.alpha = Some(v.parse()?),
            "beta" => o.beta = Some(v.parse()?),
            "eps" | "epsilon" => o.eps = Some(v.parse()?),
            "equation" => o.equation = Some(v.to_string()),
            "data_family" => o.data_family = Some(v.to_string()),
            "r0" => o.r0 = Some(v.parse()?),
            "sigma" => o.sigma = Some(v.parse()?),
            "cutoff" => o.cutoff = Some(v.parse()?),
            "domain" => o.domain = Some(v.parse()?),
            "dx" => o.dx = Some(v.parse()?),
            "cfl" => o.cfl = Some(v.parse()?),
            "tmax" | "t_max" => o.tmax = Some(v.parse()?),
            "threshold" => o.threshold = Some(v.parse()?),
            "stride" => o.stride = Some(v.parse()?),
            "eps_grid" => o.eps_grid = Some(parse_f64_list(v)?),
            "tau_fracs" => o.tau_fracs = Some(parse_f64_list(v)?),
            "literal_d" => o.literal_d = Some(parse_bool(v)?),
            "exploratory" => o.exploratory = Some(parse_bool(v)?),
            "json" => o.json = Some(parse_bool(v)?),
            "refine" => o.refine = Some(parse_bool(v)?),
            "seed" => o.seed = Some(v.parse()?),
            "bootstrap" => o.bootstrap = Some(v.parse()?),
            "resolution_tol" => o.resolution_tol = Some(v.parse()?),
            "tol" => o.tol = Some(v.parse()?),
            "delta" => o.delta = Some(v.parse()?),
            "tmax_cap" => o.tmax_cap = Some(v.parse()?),
            "workers" => o.workers = Some(v.parse()?),
            "out" => o.out = Some(PathBuf::from(v)),
            other => bail!("unknown config key {other:?}"),
        }
    }
    Ok(o)
}

impl ResolvedConfig {
    /// Resolve: defaults, then file, then flags; worker count finally
    /// overridden by `DWLAB_WORKERS` when set.
    pub fn resolve(
        command: &str,
        file: Option<&Path>,
        flags: &ConfigOverlay,
    ) -> Result<ResolvedConfig> {
        let mut cfg = ResolvedConfig {
            command: command.to_string(),
            ..ResolvedConfig::default()
        };
        if let Some(path) = file {
            load_config_file(path)?.apply(&mut cfg);
        }
        flags.apply(&mut cfg);
        if let Ok(w) = std::env::var("DWLAB_WORKERS") {
            cfg.workers = w
                .parse()
                .context("DWLAB_WORKERS must be a thread count")?;
        }
        Ok(cfg)
    }

    pub fn damping(&self) -> Result<DampingSpec> {
        DampingSpec::power(self.alpha, self.beta)
            .map_err(|e| anyhow::anyhow!("invalid damping: {e}"))
    }

    pub fn equation_kind(&self) -> Result<Equation> {
        match self.equation.as_str() {
            "damped-wave" | "wave" => Ok(Equation::DampedWave),
            "heat" => Ok(Equation::Heat),
            other => bail!("unknown equation {other:?} (damped-wave | heat)"),
        }
    }

    pub fn family(&self) -> Result<DataFamily> {
        match self.data_family.as_str() {
            "paper-bump" => Ok(DataFamily::PaperBump { r0: self.r0 }),
            "gaussian-truncated" => Ok(DataFamily::GaussianTruncated {
                amp0: 1.0,
                amp1: 1.0,
                sigma: self.sigma,
                cutoff: self.cutoff,
            }),
            other => bail!("unknown data family {other:?} (paper-bump | gaussian-truncated)"),
        }
    }

    /// Domain radius honoring the finite-speed rule when not given.
    pub fn domain_radius(&self) -> f64 {
        if self.domain > 0.0 {
            self.domain
        } else {
            self.r0.max(self.cutoff) + 1.02 * self.tmax + 4.0 * self.dx
        }
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let mut spec = ProblemSpec::new(self.n, self.p, self.damping()?, self.eps);
        spec.data = self.family()?;
        spec.equation = self.equation_kind()?;
        spec.domain_radius = self.domain_radius();
        spec.dx = self.dx;
        spec.cfl = self.cfl;
        spec.blowup_threshold = self.threshold;
        spec.t_max = self.tmax;
        spec.snapshot_dt = self.stride;
        spec.exploratory = self.exploratory;
        spec.validate()
            .map_err(|e| anyhow::anyhow!("invalid problem: {e}"))?;
        Ok(spec)
    }
}
