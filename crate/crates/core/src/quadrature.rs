//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite and
//! semi-infinite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrand of `∫_a^∞ f` after `x = a + u / (1 - u)`.
fn tail_map(f: &mut dyn FnMut(f64) -> f64, a: f64, u: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    let w = 1.0 - u;
    let v = f(a + u / w) / (w * w);
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Adaptive integrator with absolute and relative tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_segments: 4000,
        }
    }
}

impl Integrator {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// `∫_a^b f` on a finite interval.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<Estimate> {
        self.adapt(&mut f, a, b)
    }

    /// `∫_a^∞ f` through the map `x = a + u / (1 - u)`.
    pub fn integrate_to_infinity(&self, mut f: impl FnMut(f64) -> f64, a: f64) -> Result<Estimate> {
        let mut g = |u: f64| tail_map(&mut f, a, u);
        self.adapt(&mut g, 0.0, 1.0)
    }

    /// Integral over consecutive pieces `[b₀, b₁], [b₁, b₂], …`; a final
    /// breakpoint of `+∞` makes the last piece semi-infinite.
    ///
    /// The relative tolerance applies to the total: a crude first pass sets
    /// an absolute floor so that negligible pieces are not over-resolved.
    pub fn integrate_pieces(
        &self,
        mut f: impl FnMut(f64) -> f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        let pieces: Vec<(f64, f64)> = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect();
        let mut crude = 0.0;
        for &(a, b) in &pieces {
            crude += if b.is_infinite() {
                let mut g = |u: f64| tail_map(&mut f, a, u);
                gk15(&mut g, 0.0, 1.0).value.abs()
            } else {
                gk15(&mut f, a, b).value.abs()
            };
        }
        let local = Integrator {
            abs_tol: self.abs_tol.max(self.rel_tol * crude / pieces.len().max(1) as f64),
            ..*self
        };
        let mut total = Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        };
        for &(a, b) in &pieces {
            let piece = if b.is_infinite() {
                local.integrate_to_infinity(&mut f, a)?
            } else {
                local.adapt(&mut f, a, b)?
            };
            total.value += piece.value;
            total.error += piece.error;
            total.evaluations += piece.evaluations;
        }
        Ok(total)
    }

    fn adapt(&self, f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Result<Estimate> {
        let mut segments = vec![gk15(f, a, b)];
        let mut evaluations = 15;
        loop {
            let value: f64 = segments.iter().map(|s| s.value).sum();
            let error: f64 = segments.iter().map(|s| s.error).sum();
            // Tolerances below a few ulps of the result are unattainable.
            let tol = self
                .abs_tol
                .max(self.rel_tol * value.abs())
                .max(64.0 * f64::EPSILON * value.abs());
            if error <= tol {
                return Ok(Estimate {
                    value,
                    error,
                    evaluations,
                });
            }
            if segments.len() >= self.max_segments {
                return Err(Error::QuadratureNotConverged { a, b, error });
            }
            let (worst, _) = segments
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
            let s = segments.swap_remove(worst);
            let mid = 0.5 * (s.a + s.b);
            if mid <= s.a || mid >= s.b {
                // Interval can no longer be split in floating point.
                return Err(Error::QuadratureNotConverged { a, b, error });
            }
            segments.push(gk15(f, s.a, mid));
            segments.push(gk15(f, mid, s.b));
            evaluations += 30;
        }
    }
}

/// Nodes and weights of the 15-point Kronrod rule composed over `panels`
/// equal sub-intervals of `[a, b]`.
pub fn composite_kronrod(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut out = Vec::with_capacity(15 * panels);
    for p in 0..panels {
        let center = a + (p as f64 + 0.5) * width;
        for j in 0..7 {
            out.push((center - half * XGK[j], half * WGK[j]));
            out.push((center + half * XGK[j], half * WGK[j]));
        }
        out.push((center, half * WGK[7]));
    }
    out
}

/// Maximum of `f` on `[a, b]`: dense sampling followed by golden-section
/// refinement around the best sample.
pub fn maximize(f: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> (f64, f64) {
    let samples = samples.max(3);
    let h = (b - a) / (samples - 1) as f64;
    let (mut best_x, mut best) = (a, f(a));
    for i in 1..samples {
        let x = a + i as f64 * h;
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let (mut lo, mut hi) = ((best_x - h).max(a), (best_x + h).min(b));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + best_x.abs()) {
            break;
        }
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best {
            best = v;
            best_x = x;
        }
    }
    (best_x, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = Integrator::default();
        let e = q.integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0).unwrap();
        assert!((e.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let q = Integrator::default();
        let e = q.integrate_to_infinity(|x| (-x * x).exp(), 0.0).unwrap();
        assert!((e.value - 0.5 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn algebraic_tail() {
        let q = Integrator::default();
        let e = q.integrate_to_infinity(|x| 1.0 / (x * x), 1.0).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pieces_add_up() {
        let q = Integrator::default();
        let e = q
            .integrate_pieces(|x| (-x).exp(), &[0.0, 1.0, 5.0, f64::INFINITY])
            .unwrap();
        assert!((e.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn reports_non_convergence() {
        let q = Integrator {
            max_segments: 3,
            ..Integrator::default()
        };
        assert!(q.integrate(|x| (1.0 / x).sin(), 1e-6, 1.0).is_err());
    }

    #[test]
    fn composite_rule_integrates_smooth_functions() {
        let nodes = composite_kronrod(0.0, PI, 3);
        assert_eq!(nodes.len(), 45);
        let v: f64 = nodes.iter().map(|(x, w)| w * x.sin()).sum();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn maximum_of_smooth_bump() {
        let (x, v) = maximize(|x| x * (-x * x).exp(), 0.0, 5.0, 50);
        assert!((x - 0.5f64.sqrt()).abs() < 1e-7);
        assert!((v - 0.5f64.sqrt() * (-0.5f64).exp()).abs() < 1e-15);
    }
}
