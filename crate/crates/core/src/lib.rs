//! Numerical model of the pseudotoric structure on the full flag variety of
//! `C^3`, realised as the hypersurface `x0*y0 + x1*y1 + x2*y2 = 0` inside
//! `CP^2 x CP^2`.
//!
//! The crate is `no_std` (it needs `alloc` for sampled point clouds). All
//! randomness is injected through [`rand_core::RngCore`], and every routine is
//! a pure function of its inputs, so results are reproducible bit for bit.
//!
//! Layout:
//!
//! - [`geometry`]: projective points, the flag hypersurface (and its toric
//!   deformations), product charts and the Fubini-Study form
//! - [`dynamics`]: Hermitian symbols, Hamiltonian fields, Poisson brackets and
//!   the monitored flow integrator
//! - [`pseudotoric`]: the map `psi`, the base set, fibre classification,
//!   horizontal lifts and the degeneration simplex
//! - [`fibration`]: base Morse functions, level loops and the Lagrangian
//!   3-tori of the minimal fibration
//! - [`special`]: the anticanonical boundary divisor and its residue volume
//!   form
//! - [`degeneration`]: the family `F_t`, the toric fibration of `F_0` and the
//!   Hamiltonian transport between them
//! - [`flagconn`]: the projection to `CP^2`, the singular connection and the
//!   diagonal torus orbits

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod config;
pub mod degeneration;
pub mod dynamics;
pub mod error;
pub mod fibration;
pub mod flagconn;
pub mod geometry;
pub mod linalg;
pub mod math;
pub mod ode;
pub mod pseudotoric;
pub mod sampling;
pub mod special;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use geometry::{AmbientPoint, FlagPoint, ProjectivePoint, Surface};
pub use linalg::{CVec3, C64};
