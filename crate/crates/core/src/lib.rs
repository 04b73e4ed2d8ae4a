//! Numerical laboratory for 2D incompressible Navier-Stokes flows around
//! truncated Oseen vortices.
//!
//! The crate is organised bottom-up:
//!
//! * [`cutoff`] and [`profiles`]: closed-form Oseen vortex, truncated vortex
//!   and its remainder term.
//! * [`grid`], [`spectral`] and [`fields`]: periodic fields, FFT machinery,
//!   Biot-Savart inversion and quadrature norms (including weak-L²).
//! * [`solver`]: integrating-factor RK4 for the perturbation vorticity.
//! * [`diagnostics`]: norm time series, tail mass, energy checks, rate fits.
//! * [`quadrature`] and [`estimates`]: one-dimensional radial quadrature of
//!   the truncated-vortex bounds.
//! * [`presets`], [`decay`] and [`snapshot`]: initial data, decay studies and
//!   the binary field format.

pub mod cutoff;
pub mod decay;
pub mod diagnostics;
pub mod error;
pub mod estimates;
pub mod fields;
pub mod grid;
pub mod presets;
pub mod profiles;
pub mod quadrature;
pub mod snapshot;
pub mod solver;
pub mod spectral;

pub use cutoff::RadialCutoff;
pub use error::{Error, Result};
pub use grid::{Grid, ScalarField, VectorField};
pub use profiles::{SpaceTime, VortexParams};
