//! Uniform radial grid and the discrete radial Laplacian
//! `Δ_h u = u_rr + (n-1)/r · u_r` with the symmetry condition `u_r(0) = 0`
//! (ghost node) and homogeneous Dirichlet at the outer boundary.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sphere_area;

/// Nodes `r_i = i·dx` for `i = 0..len`; the last node carries the Dirichlet
/// condition.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dx: f64,
    len: usize,
}

impl RadialGrid {
    pub fn new(domain_radius: f64, dx: f64) -> Self {
        assert!(domain_radius > 0.0 && dx > 0.0 && domain_radius > dx);
        let len = libm::round(domain_radius / dx) as usize + 1;
        Self { dx, len }
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn domain_radius(&self) -> f64 {
        self.r(self.len - 1)
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.r(i))
    }

    /// Quadrature weights for radial integrals `∫ f ω_{n-1} r^{n-1} dr`
    /// (trapezoid rule, endpoint panels halved).
    pub fn volume_weights(&self, n: u32) -> Vec<f64> {
        let area = sphere_area(n);
        let mut w = vec![0.0; self.len];
        for (i, wi) in w.iter_mut().enumerate() {
            let r = self.r(i);
            let rw = if n == 1 {
                1.0
            } else {
                crate::math::powf(r, (n - 1) as f64)
            };
            let panel = if i == 0 || i == self.len - 1 { 0.5 } else { 1.0 };
            *wi = area * rw * panel * self.dx;
        }
        w
    }

    /// Apply the discrete radial Laplacian of dimension `n` into `out`.
    ///
    /// At `r = 0` the symmetry limit gives `Δu(0) = n·u_rr(0)`, discretised
    /// as `2n (u_1 - u_0)/dx^2`; the Dirichlet node maps to 0.
    pub fn laplacian(&self, n: u32, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.len);
        debug_assert_eq!(out.len(), self.len);
        let idx2 = 1.0 / (self.dx * self.dx);
        let half_idx = 0.5 / self.dx;
        let nf = n as f64;
        out[0] = 2.0 * nf * (u[1] - u[0]) * idx2;
        for i in 1..self.len - 1 {
            let second = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * idx2;
            let first = (u[i + 1] - u[i - 1]) * half_idx;
            out[i] = second + (nf - 1.0) / self.r(i) * first;
        }
        out[self.len - 1] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_ball_volume() {
        // ∫_{B_R} 1 dx = ω_{n-1} R^n / n
        for n in 1..=3u32 {
            let grid = RadialGrid::new(2.0, 1e-3);
            let w = grid.volume_weights(n);
            let vol: f64 = w.iter().sum();
            let want = sphere_area(n) * libm::pow(2.0, n as f64) / n as f64;
            assert!(
                (vol - want).abs() < 1e-5 * want,
                "n={n}: {vol} vs {want}"
            );
        }
    }

    #[test]
    fn laplacian_second_order_on_smooth_radial_field() {
        // u(r) = cos(r) on [0, L]: Δu = -cos(r) - (n-1) sin(r)/r.
        for n in 1..=3u32 {
            let mut errs = alloc::vec::Vec::new();
            for &dx in &[1e-2, 5e-3] {
                let grid = RadialGrid::new(1.0, dx);
                let u: alloc::vec::Vec<f64> =
                    grid.radii().map(libm::cos).collect();
                let mut lap = alloc::vec![0.0; grid.len()];
                grid.laplacian(n, &u, &mut lap);
                let mut emax = 0.0_f64;
                for i in 0..grid.len() - 1 {
                    let r = grid.r(i);
                    let sinc = if r == 0.0 { 1.0 } else { libm::sin(r) / r };
                    let want = -libm::cos(r) - (n as f64 - 1.0) * sinc;
                    emax = emax.max((lap[i] - want).abs());
                }
                errs.push(emax);
            }
            let rate = libm::log2(errs[0] / errs[1]);
            assert!(rate > 1.8, "n={n}: convergence rate {rate}, errs {errs:?}");
        }
    }
}
