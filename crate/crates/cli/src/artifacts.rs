//! File artifacts: CSV trace/norms/sweep/certificate writers and readers,
//! the JSON manifest, and cleanup of partial outputs on failure.
//!
//! All floating-point values are written with Rust's shortest round-trip
//! formatting (locale-independent, full precision).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ResolvedConfig;
use dwlab_core::certify::Certificate;
use dwlab_core::solver::{NormSample, Snapshot, SolutionTrace};

/// Tracks files created by a command; unless `commit` is called, everything
/// is removed on drop so failures never leave partial outputs behind.
pub struct OutputGuard {
    created: Vec<PathBuf>,
    committed: bool,
}

impl OutputGuard {
    pub fn new() -> Self {
        Self {
            created: Vec::new(),
            committed: false,
        }
    }

    pub fn track(&mut self, path: &Path) {
        self.created.push(path.to_path_buf());
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Default for OutputGuard {
    fn default() -> Self {
        Self::new()
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.created {
                let _ = fs::remove_file(path);
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ResolvedConfig,
}

pub fn write_manifest(dir: &Path, cfg: &ResolvedConfig, guard: &mut OutputGuard) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let manifest = Manifest {
        config: cfg.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    guard.track(&path);
    Ok(path)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Trace CSV: header `t,r,u,u_t`, one row per node, snapshot blocks in time
/// order.
pub fn write_trace_csv(dir: &Path, trace: &SolutionTrace, guard: &mut OutputGuard) -> Result<PathBuf> {
    let path = dir.join("trace.csv");
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["t", "r", "u", "u_t"])?;
    for snap in &trace.snapshots {
        for i in 0..trace.grid.len() {
            w.serialize((snap.t, trace.grid.r(i), snap.u[i], snap.u_t[i]))?;
        }
    }
    w.flush()?;
    guard.track(&path);
    Ok(path)
}

/// Read snapshot blocks back; `grid_len` fixes the block size.
pub fn read_trace_csv(path: &Path, grid_len: usize) -> Result<Vec<Snapshot>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut current: Option<Snapshot> = None;
    for row in reader.deserialize() {
        let (t, _r, u, u_t): (f64, f64, f64, f64) = row?;
        let start_new = match &current {
            None => true,
            Some(s) => s.t != t,
        };
        if start_new {
            if let Some(s) = current.take() {
                if s.u.len() != grid_len {
                    bail!("snapshot at t={} has {} nodes, expected {grid_len}", s.t, s.u.len());
                }
                snapshots.push(s);
            }
            current = Some(Snapshot {
                t,
                u: Vec::with_capacity(grid_len),
                u_t: Vec::with_capacity(grid_len),
            });
        }
        let s = current.as_mut().unwrap();
        s.u.push(u);
        s.u_t.push(u_t);
    }
    if let Some(s) = current.take() {
        if s.u.len() != grid_len {
            bail!("final snapshot has {} nodes, expected {grid_len}", s.u.len());
        }
        snapshots.push(s);
    }
    Ok(snapshots)
}

/// Norm series CSV: `t,sup_u,l2_u,energy`.
pub fn write_norms_csv(dir: &Path, norms: &[NormSample], guard: &mut OutputGuard) -> Result<PathBuf> {
    let path = dir.join("norms.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["t", "sup_u", "l2_u", "energy"])?;
    for s in norms {
        w.serialize((s.t, s.sup_u, s.l2_u, s.energy))?;
    }
    w.flush()?;
    guard.track(&path);
    Ok(path)
}

/// Sweep CSV: `epsilon,T_est,converged,dx`.
pub fn write_sweep_csv(
    dir: &Path,
    points: &[dwlab_core::sweep::SweepPoint],
    guard: &mut OutputGuard,
) -> Result<PathBuf> {
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["epsilon", "T_est", "converged", "dx"])?;
    for p in points {
        w.serialize((p.epsilon, p.t_est, p.converged, p.dx))?;
    }
    w.flush()?;
    guard.track(&path);
    Ok(path)
}

/// Gnuplot-friendly log-log columns: `log10_epsilon  log10_T` (whitespace
/// separated, `#` header).
pub fn write_loglog_dat(
    dir: &Path,
    points: &[dwlab_core::sweep::SweepPoint],
    guard: &mut OutputGuard,
) -> Result<PathBuf> {
    let path = dir.join("loglog.dat");
    let mut f = fs::File::create(&path)?;
    writeln!(f, "# log10_epsilon log10_T converged")?;
    for p in points {
        if p.t_est.is_finite() {
            writeln!(
                f,
                "{} {} {}",
                p.epsilon.log10(),
                p.t_est.log10(),
                u8::from(p.converged)
            )?;
        }
    }
    guard.track(&path);
    Ok(path)
}

/// Certificate CSV: `tau,R,I,J,K1,K2,K3,residual,D,C_empirical`.
pub fn write_certificates_csv(
    dir: &Path,
    certs: &[Certificate],
    d_override: Option<&[f64]>,
    guard: &mut OutputGuard,
) -> Result<PathBuf> {
    let path = dir.join("certificate.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "tau",
        "R",
        "I",
        "J",
        "K1",
        "K2",
        "K3",
        "residual",
        "D",
        "C_empirical",
    ])?;
    for (k, c) in certs.iter().enumerate() {
        let d = d_override.map(|ds| ds[k]).unwrap_or(c.d_val);
        w.serialize((
            c.tau,
            c.r,
            c.i_val,
            c.j_val,
            c.k1,
            c.k2,
            c.k3,
            c.identity_residual,
            d,
            c.c_empirical,
        ))?;
    }
    w.flush()?;
    guard.track(&path);
    Ok(path)
}

/// Generic JSON artifact writer (pretty + trailing newline, deterministic
/// field order from the struct definitions).
pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
    guard: &mut OutputGuard,
) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    guard.track(&path);
    Ok(path)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_removes_uncommitted_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.txt");
        {
            let mut guard = OutputGuard::new();
            fs::write(&path, "partial").unwrap();
            guard.track(&path);
            // dropped without commit
        }
        assert!(!path.exists());
    }

    #[test]
    fn guard_keeps_committed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("keep.txt");
        let mut guard = OutputGuard::new();
        fs::write(&path, "done").unwrap();
        guard.track(&path);
        guard.commit();
        assert!(path.exists());
    }
}
