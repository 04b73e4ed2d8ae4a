//! Decay experiments: one solver run from a preset plus power-law fits of
//! the normalised distances.

use crate::diagnostics::{fit_power_law, series, DiagnosticRecord, RateFit, RateModel};
use crate::error::{Error, Result};
use crate::presets::{initial_vorticity, InitPreset};
use crate::solver::{decompose_initial_data, Solver, SolverConfig, SolverState, Trajectory};

/// Late-time window and record spacing of a decay experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub diag_steps: usize,
}

/// Quantity tracked by a fit, normalised by `t^μ` or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tracked {
    /// `t^μ ‖v‖_{L²}`.
    ScaledEnergy,
    /// `t^μ (‖u - αΘ‖_{L²} + t^{1/2} ‖∇u - α∇Θ‖_{L²})`.
    ScaledDistance,
    /// `‖ω - αΞ‖_{L¹}`, fitted with the power·log model.
    VorticityDistance,
    TailMass,
}

impl Tracked {
    pub const ALL: [Tracked; 4] = [
        Tracked::ScaledEnergy,
        Tracked::ScaledDistance,
        Tracked::VorticityDistance,
        Tracked::TailMass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tracked::ScaledEnergy => "scaled_l2_v",
            Tracked::ScaledDistance => "scaled_dist_oseen",
            Tracked::VorticityDistance => "l1_vort_dist",
            Tracked::TailMass => "tail_mass",
        }
    }

    pub fn value(self, r: &DiagnosticRecord, mu: f64) -> f64 {
        let tm = r.t.powf(mu);
        match self {
            Tracked::ScaledEnergy => tm * r.l2_v,
            Tracked::ScaledDistance => tm * (r.l2_dist_oseen + r.t.sqrt() * r.h1_dist_oseen),
            Tracked::VorticityDistance => r.l1_vort_dist,
            Tracked::TailMass => r.tail_mass,
        }
    }

    pub fn model(self) -> RateModel {
        match self {
            Tracked::VorticityDistance => RateModel::PowerLog,
            _ => RateModel::Power,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayOutcome {
    pub trajectory: Trajectory,
    pub mu: f64,
    /// One fit per [`Tracked`] quantity that is positive on the window.
    pub fits: Vec<(Tracked, RateFit)>,
}

/// `μ = 1/q - 1/2`.
pub fn decay_exponent(q: f64) -> Result<f64> {
    if !(q > 1.0 && q < 2.0) {
        return Err(Error::InvalidConfig(format!("q = {q} outside (1, 2)")));
    }
    Ok(1.0 / q - 0.5)
}

/// Fits every tracked quantity of `records` on `window`.
pub fn fit_decay(records: &[DiagnosticRecord], mu: f64, window: (f64, f64)) -> Vec<(Tracked, RateFit)> {
    Tracked::ALL
        .iter()
        .filter_map(|&q| {
            let s = series(records, |r| q.value(r, mu));
            fit_power_law(&s, window, q.model()).ok().map(|f| (q, f))
        })
        .collect()
}

/// Runs `cfg` from `preset` (with `amplitude` for the perturbation) and fits
/// the late-time decay. The circulation of the initial data overrides
/// `cfg.params`.
pub fn decay_experiment(
    q: f64,
    alpha: f64,
    preset: &InitPreset,
    amplitude: f64,
    cfg: &SolverConfig,
    window: DecayWindow,
) -> Result<DecayOutcome> {
    let mu = decay_exponent(q)?;
    let omega0 = initial_vorticity(preset, cfg.grid, alpha, amplitude, &cfg.cutoff)?;
    let (alpha, zeta0) = decompose_initial_data(&omega0, &cfg.cutoff);
    let mut cfg = cfg.clone();
    cfg.params.alpha = alpha;
    let mut solver = Solver::new(cfg)?;
    let trajectory = solver.run(SolverState { t: 0.0, zeta: zeta0 }, window.diag_steps, &[])?;
    let fits = fit_decay(&trajectory.records, mu, (window.t_min, window.t_max));
    Ok(DecayOutcome {
        trajectory,
        mu,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_range() {
        assert!((decay_exponent(4.0 / 3.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(decay_exponent(1.0).is_err());
        assert!(decay_exponent(2.0).is_err());
    }
}
