//! Closed-form Oseen vortex, truncated Oseen vortex and remainder term.
//!
//! Every field here is either radial or tangential, so each is expressed
//! through a scalar profile of `r = |x|` and `s = 1 + t`:
//!
//! * `Θ(x, t) = x⊥ f(r)` with `f = (1 - E) / (2π r²)`, `E = exp(-r² / 4s)`,
//! * `Ξ(x, t) = E / (4π s)`,
//! * `u^χ = χ Θ`, `ω^χ = χ Ξ + χ' r f`,
//! * `R^χ = x⊥ Q(r)`, `Q = f Δχ + 2 χ' (Ξ - f) / r`.
//!
//! `x⊥ = (-x₂, x₁)`. Time is measured in units where the viscosity is 1.

use std::f64::consts::PI;

use crate::cutoff::RadialCutoff;

pub type Vec2 = [f64; 2];

/// Threshold on `|x|² / (1 + t)` below which the velocity uses its leading
/// Taylor terms.
pub const SERIES_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTime {
    pub x: Vec2,
    pub t: f64,
}

impl SpaceTime {
    pub fn new(x: Vec2, t: f64) -> Self {
        debug_assert!(t >= 0.0, "time must be nonnegative");
        Self { x, t }
    }

    pub fn r2(&self) -> f64 {
        self.x[0] * self.x[0] + self.x[1] * self.x[1]
    }

    pub fn r(&self) -> f64 {
        self.r2().sqrt()
    }
}

/// Total circulation of the vortex background (viscosity normalised to 1).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VortexParams {
    pub alpha: f64,
}

#[inline]
pub fn perp(x: Vec2) -> Vec2 {
    [-x[1], x[0]]
}

/// `f(r) = (1 - e^{-r²/4s}) / (2π r²)`, the factor with `Θ = x⊥ f`.
#[inline]
pub fn velocity_factor(r2: f64, t: f64) -> f64 {
    let s = 1.0 + t;
    if r2 < SERIES_THRESHOLD * s {
        return (1.0 - r2 / (8.0 * s)) / (8.0 * PI * s);
    }
    -(-r2 / (4.0 * s)).exp_m1() / (2.0 * PI * r2)
}

/// `df/dr`, evaluated by its Taylor series near the origin where
/// `(Ξ - 2f) / r` cancels.
pub fn velocity_factor_dr(r: f64, t: f64) -> f64 {
    let s = 1.0 + t;
    let u = r * r / (4.0 * s);
    if u < 1e-2 {
        // f = (1/8πs) Σ (-u)^k / (k+1)!, df/dr = (1/8πs) (r/2s) Σ k (-u)^{k-1} (-1) / (k+1)!
        let mut sum = 0.0;
        let mut pow = 1.0; // (-u)^{k-1}
        let mut fact = 1.0; // (k+1)!
        for k in 1..=6 {
            fact *= (k + 1) as f64;
            sum -= k as f64 * pow / fact;
            pow *= -u;
        }
        return sum * r / (2.0 * s) / (8.0 * PI * s);
    }
    (gaussian(r * r, t) - 2.0 * velocity_factor(r * r, t)) / r
}

/// `Ξ` as a function of `r²`.
#[inline]
pub fn gaussian(r2: f64, t: f64) -> f64 {
    let s = 1.0 + t;
    (-r2 / (4.0 * s)).exp() / (4.0 * PI * s)
}

/// Oseen velocity `Θ(x, t)`; the removable singularity at the origin is 0.
pub fn oseen_velocity(p: SpaceTime) -> Vec2 {
    let f = velocity_factor(p.r2(), p.t);
    let q = perp(p.x);
    [q[0] * f, q[1] * f]
}

/// Oseen vorticity `Ξ(x, t)`, a Gaussian of unit mass.
pub fn oseen_vorticity(p: SpaceTime) -> f64 {
    gaussian(p.r2(), p.t)
}

pub fn cutoff_eval(r: f64, c: &RadialCutoff) -> crate::cutoff::CutoffValue {
    c.eval(r)
}

/// Truncated Oseen velocity `u^χ = χ Θ`.
pub fn truncated_velocity(p: SpaceTime, c: &RadialCutoff) -> Vec2 {
    let chi = c.value(p.r());
    if chi == 0.0 {
        return [0.0, 0.0];
    }
    let th = oseen_velocity(p);
    [chi * th[0], chi * th[1]]
}

/// Truncated vorticity `ω^χ = χ Ξ + χ' r f`, the curl of `u^χ`.
pub fn truncated_vorticity(p: SpaceTime, c: &RadialCutoff) -> f64 {
    truncated_vorticity_radial(p.r(), p.t, c)
}

pub fn truncated_vorticity_radial(r: f64, t: f64, c: &RadialCutoff) -> f64 {
    let cv = c.eval(r);
    if cv.value == 0.0 {
        return 0.0;
    }
    let r2 = r * r;
    cv.value * gaussian(r2, t) + cv.d1 * r * velocity_factor(r2, t)
}

/// `∂ω^χ/∂r`; the gradient is this times `x / r`.
pub fn truncated_vorticity_dr(r: f64, t: f64, c: &RadialCutoff) -> f64 {
    let cv = c.eval(r);
    if cv.value == 0.0 {
        return 0.0;
    }
    let s = 1.0 + t;
    let r2 = r * r;
    let xi = gaussian(r2, t);
    let f = velocity_factor(r2, t);
    let xi_r = -r * xi / (2.0 * s);
    cv.d1 * xi + cv.value * xi_r + cv.d2 * r * f + cv.d1 * (xi - f)
}

/// `∂ω^χ/∂t`.
pub fn truncated_vorticity_dt(r: f64, t: f64, c: &RadialCutoff) -> f64 {
    let cv = c.eval(r);
    if cv.value == 0.0 {
        return 0.0;
    }
    let s = 1.0 + t;
    let r2 = r * r;
    let e = (-r2 / (4.0 * s)).exp();
    let xi = e / (4.0 * PI * s);
    let xi_t = xi * (r2 / (4.0 * s * s) - 1.0 / s);
    // ∂t (r f) = -E r / (8π s²)
    let rf_t = -e * r / (8.0 * PI * s * s);
    cv.value * xi_t + cv.d1 * rf_t
}

/// Scalar `Q` with `R^χ = x⊥ Q`; zero outside the cut-off annulus.
pub fn remainder_factor(r: f64, t: f64, c: &RadialCutoff) -> f64 {
    let cv = c.eval(r);
    if cv.d1 == 0.0 && cv.d2 == 0.0 {
        return 0.0;
    }
    let r2 = r * r;
    let f = velocity_factor(r2, t);
    let xi = gaussian(r2, t);
    let lap_chi = cv.d2 + cv.d1 / r;
    f * lap_chi + 2.0 * cv.d1 * (xi - f) / r
}

/// Remainder `R^χ = Θ Δχ + 2 (x·∇χ / |x|²)(x⊥ Ξ - Θ) = Δu^χ - ∂t u^χ`.
pub fn remainder(p: SpaceTime, c: &RadialCutoff) -> Vec2 {
    let q = remainder_factor(p.r(), p.t, c);
    let xp = perp(p.x);
    [xp[0] * q, xp[1] * q]
}

/// Azimuthal component `u_θ = χ r f` of the truncated velocity and its
/// radial derivative `χ' r f + χ (Ξ - f)`.
pub fn truncated_swirl(r: f64, t: f64, c: &RadialCutoff) -> (f64, f64) {
    let cv = c.eval(r);
    if cv.value == 0.0 {
        return (0.0, 0.0);
    }
    let r2 = r * r;
    let f = velocity_factor(r2, t);
    let xi = gaussian(r2, t);
    (cv.value * r * f, cv.d1 * r * f + cv.value * (xi - f))
}

/// `x⊥ g(r)` and its Jacobian `J[i][j] = ∂_j u_i = g M_ij + x⊥_i x_j g'/r`,
/// where `M = [[0, -1], [1, 0]]`.
pub fn tangential_jacobian(x: Vec2, g: f64, g_r: f64) -> [[f64; 2]; 2] {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let xp = perp(x);
    let w = if r > 0.0 { g_r / r } else { 0.0 };
    [
        [xp[0] * x[0] * w, -g + xp[0] * x[1] * w],
        [g + xp[1] * x[0] * w, xp[1] * x[1] * w],
    ]
}

/// Gap `Θ - u^χ = (1 - χ) Θ` between the Oseen and truncated velocities
/// together with its Jacobian. Supported in `|x| <= r_outer`.
pub fn oseen_gap(p: SpaceTime, c: &RadialCutoff) -> (Vec2, [[f64; 2]; 2]) {
    let r = p.r();
    let cv = c.eval(r);
    if cv.value == 1.0 {
        return ([0.0, 0.0], [[0.0; 2]; 2]);
    }
    let f = velocity_factor(r * r, p.t);
    let f_r = velocity_factor_dr(r, p.t);
    let g = (1.0 - cv.value) * f;
    let g_r = -cv.d1 * f + (1.0 - cv.value) * f_r;
    let xp = perp(p.x);
    ([xp[0] * g, xp[1] * g], tangential_jacobian(p.x, g, g_r))
}

/// `Ξ - ω^χ = (1 - χ) Ξ - χ' r f`, compactly supported in `|x| <= r_outer`.
pub fn oseen_vorticity_gap(p: SpaceTime, c: &RadialCutoff) -> f64 {
    let r = p.r();
    let cv = c.eval(r);
    if cv.value == 1.0 {
        return 0.0;
    }
    let r2 = r * r;
    (1.0 - cv.value) * gaussian(r2, p.t) - cv.d1 * r * velocity_factor(r2, p.t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(x: f64, y: f64, t: f64) -> SpaceTime {
        SpaceTime::new([x, y], t)
    }

    #[test]
    fn velocity_at_origin_is_zero() {
        assert_eq!(oseen_velocity(st(0.0, 0.0, 7.0)), [0.0, 0.0]);
    }

    #[test]
    fn velocity_closed_form_value() {
        let v = oseen_velocity(st(2.0, 0.0, 0.0));
        let expected = (1.0 - (-1.0f64).exp()) / (4.0 * PI);
        assert!(v[0].abs() < 1e-18);
        assert!((v[1] - expected).abs() < 1e-15);
        assert!((v[1] - 0.0503026).abs() < 1e-7);
    }

    #[test]
    fn far_field_point_vortex() {
        let v = oseen_velocity(st(60.0, 80.0, 0.0));
        let mag = v[0].hypot(v[1]);
        let pv = 1.0 / (2.0 * PI * 100.0);
        assert!(((mag - pv) / pv).abs() < 1e-3);
    }

    #[test]
    fn vorticity_values() {
        assert!((oseen_vorticity(st(0.0, 0.0, 0.0)) - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((oseen_vorticity(st(0.0, 0.0, 3.0)) - 1.0 / (16.0 * PI)).abs() < 1e-16);
        assert!((1.0 / (4.0 * PI) - 0.0795775).abs() < 1e-7);
    }

    #[test]
    fn series_branch_is_continuous() {
        let t = 2.0;
        let r2 = SERIES_THRESHOLD * (1.0 + t);
        let below = velocity_factor(r2 * (1.0 - 1e-9), t);
        let above = velocity_factor(r2 * (1.0 + 1e-9), t);
        assert!((below - above).abs() < 1e-9 * below);
    }

    #[test]
    fn velocity_is_tangential() {
        for &(x, y, t) in &[(0.3, -1.2, 0.0), (3.0, 4.0, 10.0), (-7.0, 0.1, 100.0)] {
            let v = oseen_velocity(st(x, y, t));
            assert!((v[0] * x + v[1] * y).abs() < 1e-16);
        }
    }

    #[test]
    fn factor_derivative_matches_fd() {
        for &t in &[0.0, 3.0] {
            for &r in &[1e-3, 0.05, 0.2, 1.0, 2.5, 7.0] {
                let h = 1e-5 * (1.0 + r);
                let fd = (velocity_factor((r + h) * (r + h), t)
                    - velocity_factor((r - h) * (r - h), t))
                    / (2.0 * h);
                let an = velocity_factor_dr(r, t);
                assert!((an - fd).abs() < 1e-8, "r={r} t={t} {an} {fd}");
            }
        }
    }

    #[test]
    fn truncated_fields_on_flat_regions() {
        let c = RadialCutoff::default();
        assert_eq!(truncated_velocity(st(0.5, 0.0, 4.0), &c), [0.0, 0.0]);
        let p = st(2.0, 1.5, 4.0);
        assert_eq!(truncated_velocity(p, &c), oseen_velocity(p));
        assert_eq!(truncated_vorticity(p, &c), oseen_vorticity(p));
        assert_eq!(remainder(p, &c), [0.0, 0.0]);
        assert_eq!(remainder(st(0.2, 0.1, 0.0), &c), [0.0, 0.0]);
    }

    #[test]
    fn vorticity_derivatives_match_fd() {
        let c = RadialCutoff::default();
        for &t in &[0.0, 2.0] {
            for &r in &[1.1, 1.4, 1.5, 1.8, 1.95, 2.5] {
                let h = 1e-5;
                let fd_r = (truncated_vorticity_radial(r + h, t, &c)
                    - truncated_vorticity_radial(r - h, t, &c))
                    / (2.0 * h);
                let fd_t = (truncated_vorticity_radial(r, t + h, &c)
                    - truncated_vorticity_radial(r, t + h - 2.0 * h, &c))
                    / (2.0 * h);
                assert!((truncated_vorticity_dr(r, t, &c) - fd_r).abs() < 1e-7);
                assert!((truncated_vorticity_dt(r, t, &c) - fd_t).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn swirl_derivative_matches_fd() {
        let c = RadialCutoff::default();
        for &r in &[1.2, 1.5, 1.9, 3.0] {
            let h = 1e-5;
            let (_, d) = truncated_swirl(r, 1.0, &c);
            let fd = (truncated_swirl(r + h, 1.0, &c).0 - truncated_swirl(r - h, 1.0, &c).0)
                / (2.0 * h);
            assert!((d - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn gap_jacobian_matches_fd() {
        let c = RadialCutoff::default();
        let x = [0.9, -0.7];
        let t = 0.5;
        let (_, jac) = oseen_gap(st(x[0], x[1], t), &c);
        let h = 1e-5;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let up = oseen_gap(st(xp[0], xp[1], t), &c).0;
            let um = oseen_gap(st(xm[0], xm[1], t), &c).0;
            for i in 0..2 {
                let fd = (up[i] - um[i]) / (2.0 * h);
                assert!((jac[i][j] - fd).abs() < 1e-8, "i={i} j={j}");
            }
        }
    }

    /// Fourth-order central differences in space and time of `u^χ`.
    fn fd_heat_defect(x: Vec2, t: f64, c: &RadialCutoff) -> Vec2 {
        let h = 2e-3;
        let u = |dx: f64, dy: f64, dt: f64| truncated_velocity(st(x[0] + dx, x[1] + dy, t + dt), c);
        let d2 = |axis: usize, comp: usize| {
            let pick = |k: f64| {
                let (dx, dy) = if axis == 0 { (k * h, 0.0) } else { (0.0, k * h) };
                u(dx, dy, 0.0)[comp]
            };
            (-pick(2.0) + 16.0 * pick(1.0) - 30.0 * pick(0.0) + 16.0 * pick(-1.0) - pick(-2.0))
                / (12.0 * h * h)
        };
        let ht = 1e-3;
        let dt = |comp: usize| {
            (-u(0.0, 0.0, 2.0 * ht)[comp] + 8.0 * u(0.0, 0.0, ht)[comp]
                - 8.0 * u(0.0, 0.0, -ht)[comp]
                + u(0.0, 0.0, -2.0 * ht)[comp])
                / (12.0 * ht)
        };
        [d2(0, 0) + d2(1, 0) - dt(0), d2(0, 1) + d2(1, 1) - dt(1)]
    }

    #[test]
    fn remainder_equals_heat_defect_of_truncated_vortex() {
        let c = RadialCutoff::default();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for &t in &[0.5, 5.0] {
            for k in 0..24 {
                let r = 1.05 + 0.9 * k as f64 / 23.0;
                let ang = 0.37 + k as f64;
                let x = [r * ang.cos(), r * ang.sin()];
                let exact = remainder(st(x[0], x[1], t), &c);
                let fd = fd_heat_defect(x, t, &c);
                for i in 0..2 {
                    worst = worst.max((exact[i] - fd[i]).abs());
                    scale = scale.max(exact[i].abs());
                }
            }
        }
        assert!(worst / scale < 1e-5, "relative error {}", worst / scale);
    }

    #[test]
    fn radial_identity_of_truncated_vortex() {
        // (u·∇)u + x |u|² / |x|² = 0 for the tangential field u^χ.
        let c = RadialCutoff::default();
        let h = 1e-4;
        for &(x, y) in &[(1.3, 0.4), (-0.8, 1.5), (2.5, -2.0)] {
            let t = 1.0;
            let u = truncated_velocity(st(x, y, t), &c);
            let ux = |dx: f64, dy: f64| truncated_velocity(st(x + dx, y + dy, t), &c);
            let mut adv = [0.0; 2];
            for i in 0..2 {
                let d1 = (ux(h, 0.0)[i] - ux(-h, 0.0)[i]) / (2.0 * h);
                let d2 = (ux(0.0, h)[i] - ux(0.0, -h)[i]) / (2.0 * h);
                adv[i] = u[0] * d1 + u[1] * d2;
            }
            let r2 = x * x + y * y;
            let m2 = u[0] * u[0] + u[1] * u[1];
            let res = [adv[0] + x * m2 / r2, adv[1] + y * m2 / r2];
            assert!(res[0].abs() < 1e-9 && res[1].abs() < 1e-9, "{res:?}");
        }
    }

    #[test]
    fn evaluations_are_deterministic() {
        let c = RadialCutoff::default();
        let p = st(1.234, -0.567, 3.21);
        assert_eq!(
            remainder(p, &c).map(f64::to_bits),
            remainder(p, &c).map(f64::to_bits)
        );
        assert_eq!(
            truncated_vorticity(p, &c).to_bits(),
            truncated_vorticity(p, &c).to_bits()
        );
    }
}
