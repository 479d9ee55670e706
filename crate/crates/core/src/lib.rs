//! Boussinesq temperature patches on a periodic box.
//!
//! The crate couples a pseudo-spectral vorticity solver with a marker
//! contour for the patch boundary, and evaluates the singular heat-type
//! kernels of the linearized problem directly (principal values, ball
//! cancellations, case-by-case bound ledger).
//!
//! Module map:
//! - [`kernels`]: closed-form heat, Oseen-type and auxiliary kernels.
//! - [`geometry`]: contour representation, regularity statistics, distance
//!   and arc-set queries.
//! - [`spectral`]: periodic grid, FFT-backed fields, Biot-Savart, heat
//!   semigroup, off-grid evaluation.
//! - [`solver`]: time stepping, run history, vorticity splitting, energy and
//!   tangent diagnostics.
//! - [`sio`]: principal-value quadrature of the singular operators and the
//!   bound ledger.
//! - [`config`] and [`report`]: configuration files, run directories and CSV
//!   output.
//! - [`verify`]: numerical self-checks of the kernel formulas.

pub mod config;
pub mod geometry;
pub mod kernels;
pub mod par;
pub mod quad;
pub mod report;
pub mod sio;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod verify;

pub use config::SimConfig;
pub use geometry::Contour;
pub use solver::{RunHistory, SimState};
pub use spectral::{Grid, SpectralField};

/// A point or vector in the plane.
pub type Vec2 = [f64; 2];
