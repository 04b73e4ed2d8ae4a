//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Three operations: radial profiles of the truncated vortex, a stepping
//! simulation, and an RGBA rendering of its vorticity.

use wasm_bindgen::prelude::*;

use oseen_core::diagnostics::Diagnostics;
use oseen_core::presets::{initial_vorticity, InitPreset};
use oseen_core::profiles::{remainder_factor, truncated_swirl, truncated_vorticity_radial};
use oseen_core::solver::{decompose_initial_data, total_vorticity, Solver, SolverConfig, SolverState};
use oseen_core::{Grid, RadialCutoff};

fn js(e: oseen_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Samples `r, u_θ, ω^χ, |R^χ|` at `samples` radii in `[0, r_max]`,
/// flattened row by row.
#[wasm_bindgen]
pub fn radial_profiles(
    t: f64,
    r_inner: f64,
    r_outer: f64,
    r_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsValue> {
    let c = RadialCutoff::new(r_inner, r_outer).map_err(js)?;
    let samples = samples.max(2);
    let mut out = Vec::with_capacity(4 * samples);
    for k in 0..samples {
        let r = r_max * k as f64 / (samples - 1) as f64;
        out.push(r);
        out.push(truncated_swirl(r, t, &c).0);
        out.push(truncated_vorticity_radial(r, t, &c));
        out.push((r * remainder_factor(r, t, &c)).abs());
    }
    Ok(out)
}

/// Perturbed truncated vortex on a small periodic grid.
#[wasm_bindgen]
pub struct Simulation {
    solver: Solver,
    diagnostics: Diagnostics,
    state: SolverState,
    alpha: f64,
    cutoff: RadialCutoff,
}

#[wasm_bindgen]
impl Simulation {
    /// `preset` is `oseen`, `dipole` or `quadrupole`.
    #[wasm_bindgen(constructor)]
    pub fn new(
        n: usize,
        half_width: f64,
        dt: f64,
        alpha: f64,
        amplitude: f64,
        preset: &str,
    ) -> Result<Simulation, JsValue> {
        let grid = Grid::new(n, half_width).map_err(js)?;
        let preset = match preset {
            "oseen" => InitPreset::Oseen,
            "dipole" => InitPreset::Dipole,
            "quadrupole" => InitPreset::Quadrupole,
            other => return Err(JsValue::from_str(&format!("unknown preset {other:?}"))),
        };
        let cutoff = RadialCutoff::default();
        let omega0 = initial_vorticity(&preset, grid, alpha, amplitude, &cutoff).map_err(js)?;
        let (alpha, zeta) = decompose_initial_data(&omega0, &cutoff);
        // Open-ended: `step` ignores `t_end`.
        let cfg = SolverConfig::new(grid, dt, 0.0, alpha);
        Ok(Simulation {
            solver: Solver::new(cfg).map_err(js)?,
            diagnostics: Diagnostics::new(grid, cutoff),
            state: SolverState { t: 0.0, zeta },
            alpha,
            cutoff,
        })
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.state.zeta.grid().n()
    }

    /// Advances `steps` time steps.
    pub fn step(&mut self, steps: usize) -> Result<(), JsValue> {
        for _ in 0..steps {
            self.state = self.solver.step(&self.state).map_err(js)?;
        }
        Ok(())
    }

    /// `[t, ‖v‖, ‖∇v‖, ‖u − αΘ‖, ‖∇u − α∇Θ‖, ‖ω − αΞ‖₁, tail, circulation]`.
    pub fn diagnostics(&mut self) -> Vec<f64> {
        let r = self.diagnostics.record(&self.state, self.alpha, 0.0);
        r.row()[..8].to_vec()
    }

    /// Total vorticity as `n × n` RGBA pixels, top row first, on a diverging
    /// blue–white–red scale symmetric about 0.
    pub fn render_rgba(&self, perturbation_only: bool) -> Vec<u8> {
        let field = if perturbation_only {
            self.state.zeta.clone()
        } else {
            total_vorticity(&self.state, self.alpha, &self.cutoff)
        };
        rgba(field.values(), self.n())
    }
}

fn rgba(values: &[f64], n: usize) -> Vec<u8> {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { 1.0 / scale } else { 0.0 };
    let mut out = vec![0u8; 4 * n * n];
    for j in 0..n {
        // Image rows run downward, grid rows upward.
        let row = n - 1 - j;
        for i in 0..n {
            let v = (values[j * n + i] * scale).clamp(-1.0, 1.0);
            let fade = (255.0 * (1.0 - v.abs())).round() as u8;
            let px = &mut out[4 * (row * n + i)..4 * (row * n + i) + 4];
            let (r, g, b) = if v >= 0.0 { (255, fade, fade) } else { (fade, fade, 255) };
            px.copy_from_slice(&[r, g, b, 255]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_vanish_inside_the_cutoff() {
        let p = radial_profiles(0.0, 1.0, 2.0, 4.0, 41).unwrap();
        assert_eq!(p.len(), 4 * 41);
        for row in p.chunks(4) {
            if row[0] <= 1.0 {
                assert_eq!(&row[1..], &[0.0, 0.0, 0.0]);
            }
            if row[0] >= 2.0 {
                assert_eq!(row[3], 0.0);
            }
        }
    }

    #[test]
    fn simulation_steps_and_renders() {
        let mut sim = Simulation::new(32, 8.0, 0.05, 1.0, 0.1, "dipole").unwrap();
        sim.step(4).unwrap();
        assert!((sim.time() - 0.2).abs() < 1e-12);
        let d = sim.diagnostics();
        assert!((d[7] - sim.alpha()).abs() < 1e-10);
        let img = sim.render_rgba(false);
        assert_eq!(img.len(), 4 * 32 * 32);
        assert!(img.chunks(4).all(|p| p[3] == 255));
    }

    #[test]
    fn colour_scale_is_symmetric() {
        let px = rgba(&[1.0, -1.0, 0.0, 0.5], 2);
        // Bottom grid row is the last image row.
        assert_eq!(&px[8..12], &[255, 0, 0, 255]);
        assert_eq!(&px[12..16], &[0, 0, 255, 255]);
        assert_eq!(&px[0..4], &[255, 255, 255, 255]);
        assert_eq!(&px[4..8], &[255, 128, 128, 255]);
    }
}
