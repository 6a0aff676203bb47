//! Numerical laboratory for finite-time blow-up of the semilinear damped wave
//! equation `u_tt - Δu + Φ(t,x) u_t = |u|^p` with damping coefficient
//! `Φ(t,x) = <x>^{-α} (1+t)^{-β}`, and for the lifespan scaling of its
//! small-amplitude solutions.
//!
//! The crate is organised around the workflow of a scaling experiment:
//!
//! * [`theory`] — closed-form scalar objects: the lifespan exponent κ, the
//!   gauge `g(t)` and its normalisation constant `B`, critical exponents,
//!   the weight `F_{p,α}` and the three-case lifespan predictor.
//! * [`testfn`] — the compactly supported bump `φ`, the temporal cutoff `η`,
//!   their derivatives, and the elementary Young-type inequality.
//! * [`solver`] — radial finite-difference integration of the damped wave
//!   equation (and its heat analogue) with blow-up detection.
//! * [`certify`] — quadrature evaluation of the weak-form functionals
//!   `I`, `J`, `K1..K3`, `D(τ,R)` on a recorded solution trace.
//! * [`sweep`] — lifespan sweeps over the data amplitude ε and log-log
//!   fitting of the scaling exponent with bootstrap confidence intervals.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes
//! through [`libm`]. IO, CLI and file formats live in the companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod certify;
mod math;
mod quad;
pub mod solver;
pub mod sweep;
pub mod testfn;
pub mod theory;

pub use solver::{BlowupReport, ProblemSpec, SolutionTrace};
pub use theory::{DampingSpec, ExponentReport, Gauge};
