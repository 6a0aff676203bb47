//! Backward-Euler scheme for the heat analogue `Φ(t,x) v_t = Δv + |v|^p [+ f]`.
//! The diffusion is implicit (one tridiagonal solve per step, so no
//! `dt ~ dx²` collapse); the source is explicit. The implicit matrix is an
//! M-matrix, so nonnegative data with a nonnegative source stay nonnegative.

use alloc::vec;
use alloc::vec::Vec;

use super::grid::RadialGrid;
use super::wave::{Forcing, StepStatus};
use crate::math::abs_pow;
use crate::theory::DampingSpec;

pub struct HeatStepper<'a> {
    grid: &'a RadialGrid,
    n: u32,
    p: f64,
    damping: DampingSpec,
    spatial: Vec<f64>,
    source_on: bool,
    forcing: Option<Forcing<'a>>,
    // tridiagonal scratch
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HeatState {
    pub t: f64,
    pub dt: f64,
    pub v: Vec<f64>,
    /// Previous level, kept for velocity reconstruction in traces.
    pub v_prev: Vec<f64>,
}

impl<'a> HeatStepper<'a> {
    pub fn new(grid: &'a RadialGrid, n: u32, p: f64, damping: DampingSpec) -> Self {
        let m = grid.len();
        let spatial = grid.radii().map(|r| damping.spatial_factor(r)).collect();
        Self {
            grid,
            n,
            p,
            damping,
            spatial,
            source_on: true,
            forcing: None,
            lower: vec![0.0; m],
            diag: vec![0.0; m],
            upper: vec![0.0; m],
            rhs: vec![0.0; m],
        }
    }

    pub fn with_source(mut self, on: bool) -> Self {
        self.source_on = on;
        self
    }

    pub fn with_forcing(mut self, f: Forcing<'a>) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn init_state(&self, v0: &[f64], dt: f64) -> HeatState {
        HeatState {
            t: 0.0,
            dt,
            v: v0.to_vec(),
            v_prev: v0.to_vec(),
        }
    }

    /// One backward-Euler step: `(Φ/dt I - Δ_h) v^{n+1} = Φ/dt v^n + |v^n|^p`.
    pub fn step(&mut self, state: &mut HeatState) -> StepStatus {
        let m = self.grid.len();
        let dx = self.grid.dx();
        let idx2 = 1.0 / (dx * dx);
        let dt = state.dt;
        let temporal = self.damping.temporal_factor(state.t);
        let nf = self.n as f64;

        // row 0: symmetry stencil Δv(0) = 2n (v_1 - v_0)/dx²
        self.diag[0] = self.spatial[0] * temporal / dt + 2.0 * nf * idx2;
        self.upper[0] = -2.0 * nf * idx2;
        for i in 1..m - 1 {
            let drift = (nf - 1.0) / self.grid.r(i) * 0.5 / dx;
            self.lower[i] = -(idx2 - drift);
            self.diag[i] = self.spatial[i] * temporal / dt + 2.0 * idx2;
            self.upper[i] = -(idx2 + drift);
        }
        // Dirichlet row
        self.lower[m - 1] = 0.0;
        self.diag[m - 1] = 1.0;

        for i in 0..m - 1 {
            let phi = self.spatial[i] * temporal;
            let mut src = if self.source_on {
                abs_pow(state.v[i], self.p)
            } else {
                0.0
            };
            if let Some(f) = self.forcing {
                src += f(state.t, self.grid.r(i));
            }
            self.rhs[i] = phi / dt * state.v[i] + src;
        }
        self.rhs[m - 1] = 0.0;

        // Thomas algorithm (in place on scratch copies).
        let mut c_star = vec![0.0; m];
        let mut d_star = vec![0.0; m];
        c_star[0] = self.upper[0] / self.diag[0];
        d_star[0] = self.rhs[0] / self.diag[0];
        for i in 1..m {
            let denom = self.diag[i] - self.lower[i] * c_star[i - 1];
            c_star[i] = if i < m - 1 { self.upper[i] / denom } else { 0.0 };
            d_star[i] = (self.rhs[i] - self.lower[i] * d_star[i - 1]) / denom;
        }
        let mut ok = true;
        state.v_prev.copy_from_slice(&state.v);
        state.v[m - 1] = d_star[m - 1];
        for i in (0..m - 1).rev() {
            let value = d_star[i] - c_star[i] * state.v[i + 1];
            if !value.is_finite() {
                ok = false;
                break;
            }
            state.v[i] = value;
        }
        if !ok {
            state.v.copy_from_slice(&state.v_prev);
            return StepStatus::NonFinite;
        }
        state.t += dt;
        StepStatus::Ok
    }

    /// `v_t` at the current level (first-order backward difference).
    pub fn velocity(&self, state: &HeatState) -> Vec<f64> {
        state
            .v
            .iter()
            .zip(&state.v_prev)
            .map(|(&a, &b)| (a - b) / state.dt)
            .collect()
    }
}
