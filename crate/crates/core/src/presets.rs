//! Initial vorticity presets.

use std::path::PathBuf;

use crate::cutoff::RadialCutoff;
use crate::diagnostics::Diagnostics;
use crate::error::{Error, Result};
use crate::grid::{sample_scalar, Grid, ScalarField};
use crate::profiles::{oseen_vorticity, truncated_vorticity};
use crate::snapshot::{Snapshot, SnapshotKind};

#[derive(Debug, Clone, PartialEq)]
pub enum InitPreset {
    /// `ω0 = α Ξ(·, 0)`.
    Oseen,
    /// `ω0 = α ω^χ(·, 0) + A x₁ e^{-|x|²}`, `A` chosen so that the
    /// perturbation velocity has `‖v0‖_{L²} = amplitude`.
    Dipole,
    /// As [`InitPreset::Dipole`] with the profile `x₁ x₂ e^{-|x|²}`.
    Quadrupole,
    /// Total or perturbation vorticity read from a snapshot file.
    File(PathBuf),
}

impl InitPreset {
    pub fn name(&self) -> &'static str {
        match self {
            InitPreset::Oseen => "oseen",
            InitPreset::Dipole => "dipole",
            InitPreset::Quadrupole => "quadrupole",
            InitPreset::File(_) => "file",
        }
    }
}

/// Mean-free dipole with unit-`L²` velocity, scaled to `amplitude`.
pub fn dipole(grid: Grid, amplitude: f64) -> ScalarField {
    normalized(grid, amplitude, |x| x[0] * (-(x[0] * x[0] + x[1] * x[1])).exp())
}

pub fn quadrupole(grid: Grid, amplitude: f64) -> ScalarField {
    normalized(grid, amplitude, |x| {
        x[0] * x[1] * (-(x[0] * x[0] + x[1] * x[1])).exp()
    })
}

fn normalized(grid: Grid, amplitude: f64, shape: impl Fn([f64; 2]) -> f64) -> ScalarField {
    let mut w = ScalarField::from_fn(grid, shape);
    crate::solver::remove_mean(&mut w);
    let norm = Diagnostics::new(grid, RadialCutoff::default()).energy_norm(&w);
    if norm > 0.0 {
        w.scale(amplitude / norm);
    }
    w
}

/// Total initial vorticity `ω0` for a preset.
pub fn initial_vorticity(
    preset: &InitPreset,
    grid: Grid,
    alpha: f64,
    amplitude: f64,
    cutoff: &RadialCutoff,
) -> Result<ScalarField> {
    let background = || sample_scalar(grid, 0.0, |p| truncated_vorticity(p, cutoff)).scaled(alpha);
    match preset {
        InitPreset::Oseen => Ok(sample_scalar(grid, 0.0, oseen_vorticity).scaled(alpha)),
        InitPreset::Dipole => {
            let mut w = dipole(grid, amplitude);
            w.axpy(1.0, &background())?;
            Ok(w)
        }
        InitPreset::Quadrupole => {
            let mut w = quadrupole(grid, amplitude);
            w.axpy(1.0, &background())?;
            Ok(w)
        }
        InitPreset::File(path) => {
            let snap = Snapshot::load(path)?;
            if snap.grid != grid {
                return Err(Error::GridMismatch);
            }
            let mut w = snap.to_scalar()?;
            if snap.kind == SnapshotKind::PerturbationVorticity {
                w.axpy(1.0, &background())?;
            }
            Ok(w)
        }
    }
}
