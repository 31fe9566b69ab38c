//! Pseudo-spectral simulation and analyticity-radius analysis for nonlinear
//! wave equations on the periodic torus.
//!
//! The crate provides:
//!
//! - spectral fields on the mode cube `|j_i| <= N` with real/spectral
//!   transforms and alias-free pointwise powers ([`transform`]);
//! - Sobolev, Gevrey-Sobolev, and Wiener-algebra norms with anisotropic
//!   weights ([`norms`]), plus the algebra constant `C0` ([`constants`]);
//! - analytic nonlinearities and their majorising series ([`nonlinearity`]);
//! - a leapfrog/RK4 Galerkin solver with an exact elliptic traveling-wave
//!   reference ([`solver`], [`sn_wave`], [`elliptic`]);
//! - the radius-of-analyticity lower-bound ODE family ([`bounds`]);
//! - measurement of the actual radius from Fourier decay ([`estimator`]);
//! - run orchestration, config files, and CSV emission ([`config`],
//!   [`runner`], [`io`]).

// Validation deliberately writes `!(x > 0.0)` so NaN is rejected alongside
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod constants;
pub mod elliptic;
pub mod error;
pub mod estimator;
pub mod field;
pub mod io;
pub mod lattice;
pub mod nonlinearity;
pub mod norms;
pub mod runner;
pub mod sn_wave;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use field::{GridField, SpectralField};
pub use lattice::Lattice;
