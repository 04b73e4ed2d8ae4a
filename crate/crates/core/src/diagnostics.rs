//! Norm time series, distances to the Oseen vortex and power-law fits.

use std::f64::consts::E;

use log::warn;

use crate::cutoff::RadialCutoff;
use crate::error::{Error, Result};
use crate::fields::{derivative_spectrum, velocity_spectrum};
use crate::grid::{Grid, ScalarField};
use crate::profiles::{oseen_gap, oseen_vorticity_gap, truncated_vorticity_radial, SpaceTime};
use crate::solver::{SolverConfig, SolverState, Trajectory};
use crate::spectral::Spectral;

/// Column order of the trajectory CSV.
pub const CSV_COLUMNS: [&str; 9] = [
    "t",
    "l2_v",
    "h1_v",
    "l2_dist_oseen",
    "h1_dist_oseen",
    "l1_vort_dist",
    "tail_mass",
    "circulation",
    "dissipation_integral",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailStatus {
    Ok,
    /// `t <= e`, so `log t <= 1` and the tail region is not defined.
    TooEarly,
    /// `√t log t >= L`: the disk no longer fits in the box.
    RadiusExceedsBox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMass {
    pub value: f64,
    pub status: TailStatus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `‖v‖_{L²}`.
    pub l2_v: f64,
    /// `‖∇v‖_{L²}`.
    pub h1_v: f64,
    /// `‖u - αΘ‖_{L²}`.
    pub l2_dist_oseen: f64,
    /// `‖∇u - α∇Θ‖_{L²}`.
    pub h1_dist_oseen: f64,
    /// `‖ω - αΞ‖_{L¹}`.
    pub l1_vort_dist: f64,
    pub tail_mass: f64,
    pub tail_status: TailStatus,
    pub circulation: f64,
    /// Running `∫₀ᵗ ‖∇v‖² ds`.
    pub dissipation_integral: f64,
}

impl DiagnosticRecord {
    /// Values in [`CSV_COLUMNS`] order.
    pub fn row(&self) -> [f64; 9] {
        [
            self.t,
            self.l2_v,
            self.h1_v,
            self.l2_dist_oseen,
            self.h1_dist_oseen,
            self.l1_vort_dist,
            self.tail_mass,
            self.circulation,
            self.dissipation_integral,
        ]
    }

    pub fn from_row(row: &[f64; 9]) -> Self {
        Self {
            t: row[0],
            l2_v: row[1],
            h1_v: row[2],
            l2_dist_oseen: row[3],
            h1_dist_oseen: row[4],
            l1_vort_dist: row[5],
            tail_mass: row[6],
            tail_status: TailStatus::Ok,
            circulation: row[7],
            dissipation_integral: row[8],
        }
    }
}

/// Radius `√t log t` of the tail region.
pub fn tail_radius(t: f64) -> f64 {
    t.sqrt() * t.ln()
}

/// `L¹` mass of `ω` outside the sharp disk of radius `radius`.
pub fn mass_outside(omega: &ScalarField, radius: f64) -> f64 {
    let g = omega.grid();
    let r2 = radius * radius;
    let sum: f64 = g
        .points()
        .filter(|(_, x)| x[0] * x[0] + x[1] * x[1] >= r2)
        .map(|(k, _)| omega.values()[k].abs())
        .sum();
    sum * g.cell_area()
}

/// Vorticity mass outside `|x| >= √t log t`; zero with a flagged status when
/// the region is undefined or leaves the box.
pub fn tail_mass(omega: &ScalarField, t: f64) -> TailMass {
    if t <= E {
        return TailMass {
            value: 0.0,
            status: TailStatus::TooEarly,
        };
    }
    let radius = tail_radius(t);
    if radius >= omega.grid().half_width() {
        warn!(
            "tail radius {radius:.3} at t = {t} exceeds the box half-width {}",
            omega.grid().half_width()
        );
        return TailMass {
            value: 0.0,
            status: TailStatus::RadiusExceedsBox,
        };
    }
    TailMass {
        value: mass_outside(omega, radius),
        status: TailStatus::Ok,
    }
}

/// Evaluates [`DiagnosticRecord`]s on one grid.
pub struct Diagnostics {
    grid: Grid,
    cutoff: RadialCutoff,
    sp: Spectral,
}

impl Diagnostics {
    pub fn new(grid: Grid, cutoff: RadialCutoff) -> Self {
        Self {
            grid,
            cutoff,
            sp: Spectral::new(grid),
        }
    }

    /// Diagnostics of `u = α u^χ + v`, `ω = α ω^χ + ζ`.
    ///
    /// `‖∇v‖_{L²}` is computed as `‖ζ‖_{L²}`, which is exact for mean-free
    /// periodic divergence-free fields. Distances to the Oseen vortex use the
    /// compactly supported gaps `Θ - u^χ` and `Ξ - ω^χ`, so the `1/|x|`
    /// velocity tails never enter a periodic quadrature.
    pub fn record(&mut self, state: &SolverState, alpha: f64, dissipation: f64) -> DiagnosticRecord {
        let g = self.grid;
        let c = self.cutoff;
        let t = state.t;
        let area = g.cell_area();
        let zeta = state.zeta.values();

        let zh = self.sp.forward_real(zeta);
        let (vxh, vyh) = velocity_spectrum(&self.sp, &zh);
        let (vx, vy) = self.sp.inverse_pair(&vxh, &vyh);
        let (dxx, dxy) = self.sp.inverse_pair(
            &derivative_spectrum(&self.sp, &vxh, 0),
            &derivative_spectrum(&self.sp, &vxh, 1),
        );
        let (dyx, dyy) = self.sp.inverse_pair(
            &derivative_spectrum(&self.sp, &vyh, 0),
            &derivative_spectrum(&self.sp, &vyh, 1),
        );

        let mut l2_v = 0.0;
        let mut h1_v = 0.0;
        let mut l2_d = 0.0;
        let mut h1_d = 0.0;
        let mut l1_w = 0.0;
        let mut zsum = 0.0;
        let tail_r = (t > E).then(|| tail_radius(t));
        let tail_ok = tail_r.is_some_and(|r| r < g.half_width());
        let mut tail = 0.0;
        for (k, x) in g.points() {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let r = r2.sqrt();
            l2_v += vx[k] * vx[k] + vy[k] * vy[k];
            h1_v += zeta[k] * zeta[k];
            zsum += zeta[k];
            let (gap, jac, wgap) = if alpha != 0.0 && r < c.r_outer() {
                let p = SpaceTime::new(x, t);
                let (gv, gj) = oseen_gap(p, &c);
                (gv, gj, oseen_vorticity_gap(p, &c))
            } else {
                ([0.0; 2], [[0.0; 2]; 2], 0.0)
            };
            let ex = vx[k] - alpha * gap[0];
            let ey = vy[k] - alpha * gap[1];
            l2_d += ex * ex + ey * ey;
            let j = [
                dxx[k] - alpha * jac[0][0],
                dxy[k] - alpha * jac[0][1],
                dyx[k] - alpha * jac[1][0],
                dyy[k] - alpha * jac[1][1],
            ];
            h1_d += j.iter().map(|v| v * v).sum::<f64>();
            l1_w += (zeta[k] - alpha * wgap).abs();
            if tail_ok && r >= tail_r.unwrap_or(f64::INFINITY) {
                let w = zeta[k]
                    + if alpha != 0.0 {
                        alpha * truncated_vorticity_radial(r, t, &c)
                    } else {
                        0.0
                    };
                tail += w.abs();
            }
        }
        let tail_status = match tail_r {
            None => TailStatus::TooEarly,
            Some(_) if !tail_ok => TailStatus::RadiusExceedsBox,
            Some(_) => TailStatus::Ok,
        };
        DiagnosticRecord {
            t,
            l2_v: (l2_v * area).sqrt(),
            h1_v: (h1_v * area).sqrt(),
            l2_dist_oseen: (l2_d * area).sqrt(),
            h1_dist_oseen: (h1_d * area).sqrt(),
            l1_vort_dist: l1_w * area,
            tail_mass: tail * area,
            tail_status,
            circulation: alpha + zsum * area,
            dissipation_integral: dissipation,
        }
    }

    /// `‖v‖_{L²}` from the spectrum (Parseval).
    pub fn energy_norm(&mut self, zeta: &ScalarField) -> f64 {
        let zh = self.sp.forward_real(zeta.values());
        let (vx, vy) = velocity_spectrum(&self.sp, &zh);
        (self.sp.l2_squared(&vx) + self.sp.l2_squared(&vy)).sqrt()
    }
}

/// Single-record convenience wrapper around [`Diagnostics::record`].
pub fn record(state: &SolverState, cfg: &SolverConfig) -> DiagnosticRecord {
    Diagnostics::new(cfg.grid, cfg.cutoff).record(state, cfg.alpha(), 0.0)
}

/// Relative defect of the energy equality
/// `½‖v(t)‖² + ∫₀ᵗ ‖∇v‖² = ½‖v₀‖²`, maximised over the records.
pub fn energy_identity_residual(traj: &Trajectory) -> Result<f64> {
    if traj.alpha != 0.0 {
        return Err(Error::NotApplicable(format!(
            "energy equality needs zero circulation, got alpha = {}",
            traj.alpha
        )));
    }
    let Some(first) = traj.records.first() else {
        return Ok(0.0);
    };
    let e0 = 0.5 * first.l2_v * first.l2_v;
    if e0 == 0.0 {
        return Ok(0.0);
    }
    Ok(traj
        .records
        .iter()
        .map(|r| (0.5 * r.l2_v * r.l2_v + r.dissipation_integral - e0).abs() / e0)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    /// Smallest `K` with `LHS(t) <= K (‖v₀‖² + α² log(1+t))` on all samples.
    pub k_hat: f64,
    /// `(t, LHS / (‖v₀‖² + α² log(1+t)))`.
    pub ratios: Vec<(f64, f64)>,
}

/// Envelope constant from samples `(t, ‖v‖² + ∫₀ᵗ ‖∇v‖²)`.
pub fn envelope_from_series(samples: &[(f64, f64)], alpha: f64, v0_sq: f64) -> EnvelopeFit {
    let ratios: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(t, lhs)| (t, lhs / (v0_sq + alpha * alpha * (1.0 + t).ln())))
        .collect();
    let k_hat = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    EnvelopeFit { k_hat, ratios }
}

/// Logarithmic energy envelope of a trajectory.
pub fn log_energy_envelope(traj: &Trajectory, alpha: f64, v0_norm: f64) -> EnvelopeFit {
    let samples: Vec<(f64, f64)> = traj
        .records
        .iter()
        .map(|r| (r.t, r.l2_v * r.l2_v + r.dissipation_integral))
        .collect();
    envelope_from_series(&samples, alpha, v0_norm * v0_norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `y = A t^e`.
    Power,
    /// `y = A t^e log t`.
    PowerLog,
}

impl std::fmt::Display for RateModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RateModel::Power => "power",
            RateModel::PowerLog => "power_log",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
    /// RMS residual in log space.
    pub residual: f64,
    pub model: RateModel,
}

pub const MIN_FIT_POINTS: usize = 8;

/// Least squares of `log y` against `log t` over the samples with
/// `t ∈ [window.0, window.1]`. Under [`RateModel::PowerLog`] the term
/// `log log t` enters with unit coefficient.
pub fn fit_power_law(series: &[(f64, f64)], window: (f64, f64), model: RateModel) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .copied()
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            got: pts.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let mut xs = Vec::with_capacity(pts.len());
    let mut ys = Vec::with_capacity(pts.len());
    for &(t, y) in &pts {
        if !(y > 0.0) || !(t > 0.0) {
            return Err(Error::NonPositiveValues { t, value: y });
        }
        let lt = t.ln();
        let ly = match model {
            RateModel::Power => y.ln(),
            RateModel::PowerLog => {
                if lt <= 0.0 {
                    return Err(Error::NonPositiveValues { t, value: lt });
                }
                y.ln() - lt.ln()
            }
        };
        xs.push(lt);
        ys.push(ly);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - exponent * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + exponent * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        exponent,
        amplitude: intercept.exp(),
        window,
        residual,
        model,
    })
}

/// Series `(t, column)` extracted from records.
pub fn series(records: &[DiagnosticRecord], pick: impl Fn(&DiagnosticRecord) -> f64) -> Vec<(f64, f64)> {
    records.iter().map(|r| (r.t, pick(r))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_scalar;
    use crate::profiles::oseen_vorticity;

    fn synthetic(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..40).map(|i| {
            let t = 2.0 * 1.1f64.powi(i);
            (t, f(t))
        })
        .collect()
    }

    #[test]
    fn fits_pure_power() {
        let s = synthetic(|t| t.powf(-0.5));
        let fit = fit_power_law(&s, (1.0, 1e4), RateModel::Power).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-6);
        assert!((fit.amplitude - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fits_power_times_log() {
        let s = synthetic(|t| 2.0 * t.powf(-0.25) * t.ln());
        let fit = fit_power_law(&s, (1.0, 1e4), RateModel::PowerLog).unwrap();
        assert!((fit.exponent + 0.25).abs() < 1e-6);
        assert!((fit.amplitude - 2.0).abs() < 1e-6);
        assert!(fit.residual <= 1e-6);
    }

    #[test]
    fn constant_has_zero_exponent() {
        let s = synthetic(|_| 3.7);
        let fit = fit_power_law(&s, (0.0, 1e9), RateModel::Power).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let s = synthetic(|t| t);
        assert!(matches!(
            fit_power_law(&s[..5], (0.0, 1e9), RateModel::Power),
            Err(Error::InsufficientData { .. })
        ));
        let mut bad = s.clone();
        bad[3].1 = 0.0;
        assert!(matches!(
            fit_power_law(&bad, (0.0, 1e9), RateModel::Power),
            Err(Error::NonPositiveValues { .. })
        ));
    }

    #[test]
    fn envelope_of_constructed_series() {
        let samples: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = i as f64 * 5.0;
                (t, 3.0 * (1.0 + (1.0 + t).ln()))
            })
            .collect();
        let fit = envelope_from_series(&samples, 1.0, 1.0);
        assert!((fit.k_hat - 3.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_tail_mass() {
        let g = Grid::new(1024, 20.0).unwrap();
        let t = 9.0;
        let w = sample_scalar(g, t, oseen_vorticity).scaled(0.5);
        let m = tail_mass(&w, t);
        assert_eq!(m.status, TailStatus::Ok);
        let exact = 0.5 * (-(9.0 * 9f64.ln().powi(2)) / 40.0).exp();
        assert!(((m.value - exact) / exact).abs() < 1e-2, "{} {}", m.value, exact);
    }

    #[test]
    fn tail_mass_fallbacks() {
        let g = Grid::new(64, 5.0).unwrap();
        let w = ScalarField::from_fn(g, |x| if x[0].hypot(x[1]) < 1.0 { 1.0 } else { 0.0 });
        assert_eq!(tail_mass(&w, 2.0).status, TailStatus::TooEarly);
        let m = tail_mass(&w, 4.0);
        assert_eq!((m.value, m.status), (0.0, TailStatus::Ok));
        let far = tail_mass(&w, 30.0);
        assert_eq!((far.value, far.status), (0.0, TailStatus::RadiusExceedsBox));
    }
}
