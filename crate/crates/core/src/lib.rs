//! Four-level atom model of oscillating nonlinear Faraday rotation under
//! electromagnetically induced transparency.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the numerical core:
//!
//! - [`params`] and [`model`]: physical parameters, the interaction-picture
//!   Hamiltonian and the 16×16 Lindblad generator acting on the
//!   column-stacked density matrix (basis order `|0>, |1>, |2>, |3>`).
//! - [`evolution`]: an adaptive Dormand–Prince 5(4) integrator and an
//!   independent matrix-exponential propagator used as an oracle.
//! - [`analytic`]: leading-order closed forms for the Zeeman and optical
//!   coherences, the beat damping rate, the group velocity and regime checks.
//! - [`observables`]: absorption/dispersion, thin-medium rotation angle,
//!   z-sliced propagation, cross-modulation and damped-cosine fitting.
//! - [`doppler`]: Gauss–Hermite velocity averaging.
//!
//! Rates and times are in any consistent unit system. Most of the test
//! suite works in units where the optical dephasing rate `Γ = 3γ/2` is 1.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod analytic;
pub mod doppler;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod params;
pub mod state;

pub use error::{Error, Result};
pub use linalg::C64;
