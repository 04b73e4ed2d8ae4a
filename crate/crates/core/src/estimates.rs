//! Quadrature evidence for the norm bounds on the truncated vortex and the
//! remainder.
//!
//! Every field involved is tangential with a radial profile, so all norms
//! reduce to one-dimensional integrals in `r`:
//!
//! * `|u^χ| = |u_θ|`, `u_θ = χ r f`;
//! * `|∇u^χ|² = (u_θ / r)² + u_θ'²` (Frobenius);
//! * `|R^χ| = r |Q|`, supported in the annulus `D = [r_inner, r_outer]`.
//!
//! The pairing `∫_D R^χ · u` with non-radial test fields is evaluated on a
//! polar tensor rule (composite Kronrod in `r`, trapezoid in `θ`).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutoff::RadialCutoff;
use crate::error::{Error, Result};
use crate::fields::Exponent;
use crate::profiles::{remainder_factor, truncated_swirl, velocity_factor};
use crate::quadrature::{composite_kronrod, maximize, Integrator};

/// `t = 0` followed by four points per decade on `[10⁻², 10³]`.
pub fn default_t_grid() -> Vec<f64> {
    let mut t = vec![0.0];
    t.extend((0..=20).map(|k| 10f64.powf(-2.0 + 0.25 * k as f64)));
    t
}

/// Pairs `(s, t)` with `s ∈ {0, 1, 10, 100}` and `(1+t)/(1+s)` on a
/// logarithmic grid of 16 ratios in `[1.01, 10³]`.
pub fn default_pairs() -> Vec<(f64, f64)> {
    let lo = (1.01f64).log10();
    let mut out = Vec::new();
    for s in [0.0, 1.0, 10.0, 100.0] {
        for k in 0..16 {
            let lambda = 10f64.powf(lo + (3.0 - lo) * k as f64 / 15.0);
            out.push((s, lambda * (1.0 + s) - 1.0));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateConfig {
    pub cutoff: RadialCutoff,
    pub t_grid: Vec<f64>,
    pub p_velocity: Vec<Exponent>,
    pub p_gradient: Vec<Exponent>,
    pub pairs: Vec<(f64, f64)>,
    pub p_remainder: Vec<Exponent>,
    /// Times at which the pairing inequality is sampled.
    pub pairing_times: Vec<f64>,
    pub n_random_fields: usize,
    pub seed: u64,
    pub resolution: Resolution,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        let e = |v: &[f64]| v.iter().map(|&p| Exponent::new(p)).collect();
        Self {
            cutoff: RadialCutoff::default(),
            t_grid: default_t_grid(),
            p_velocity: e(&[3.0, 4.0, 8.0, f64::INFINITY]),
            p_gradient: e(&[1.5, 2.0, 4.0, f64::INFINITY]),
            pairs: default_pairs(),
            p_remainder: e(&[1.0, 2.0, f64::INFINITY]),
            pairing_times: vec![0.0, 1.0, 10.0, 100.0],
            n_random_fields: 100,
            seed: 0,
            resolution: Resolution::default(),
        }
    }
}

/// Quadrature resolution knobs; [`Resolution::refined`] doubles or tightens
/// every one of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub rel_tol: f64,
    /// Extra uniform splits of every radial piece.
    pub splits: usize,
    /// Dense samples before golden-section refinement of suprema.
    pub max_samples: usize,
    pub radial_panels: usize,
    pub angular_points: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            splits: 1,
            max_samples: 2000,
            radial_panels: 4,
            angular_points: 128,
        }
    }
}

impl Resolution {
    pub fn refined(&self) -> Self {
        Self {
            rel_tol: self.rel_tol * 1e-2,
            splits: 2 * self.splits,
            max_samples: 2 * self.max_samples,
            radial_panels: 2 * self.radial_panels,
            angular_points: 2 * self.angular_points,
        }
    }

    fn integrator(&self) -> Integrator {
        Integrator {
            abs_tol: 0.0,
            rel_tol: self.rel_tol,
            max_segments: 20_000,
        }
    }
}

/// Running maximum of relative quadrature error estimates.
#[derive(Debug, Default, Clone, Copy)]
struct ErrorTracker(f64);

impl ErrorTracker {
    fn note(&mut self, value: f64, error: f64) {
        if value != 0.0 {
            self.0 = self.0.max((error / value).abs());
        }
    }
}

/// Breakpoints `[a, ..., ∞]` covering the scales of a profile at time `t`.
fn breaks(c: &RadialCutoff, scales: &[f64], splits: usize) -> Vec<f64> {
    let mut b = vec![c.r_inner(), c.r_outer()];
    for &s in scales {
        for m in [1.0, 4.0, 16.0] {
            b.push(m * s.sqrt());
        }
    }
    b.retain(|&x| x >= c.r_inner());
    b.sort_by(f64::total_cmp);
    b.dedup();
    let mut out = Vec::with_capacity(b.len() * splits + 1);
    for w in b.windows(2) {
        for k in 0..splits {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / splits as f64);
        }
    }
    out.push(*b.last().expect("nonempty"));
    out.push(f64::INFINITY);
    out
}

/// `‖g‖_{L^p(R²)}` for a radial magnitude `g(r)` vanishing on `[0, r_inner]`.
fn radial_norm(
    g: impl Fn(f64) -> f64,
    p: Exponent,
    pieces: &[f64],
    res: &Resolution,
    err: &mut ErrorTracker,
) -> Result<f64> {
    match p {
        Exponent::Infinity => {
            let mut best: f64 = 0.0;
            let finite: Vec<f64> = pieces.iter().copied().filter(|x| x.is_finite()).collect();
            let per = (res.max_samples / finite.len().max(1)).max(50);
            for w in finite.windows(2) {
                let (_, m) = maximize(|r| g(r).abs(), w[0], w[1], per);
                best = best.max(m);
            }
            Ok(best)
        }
        Exponent::Finite(p) => {
            let est = res
                .integrator()
                .integrate_pieces(|r| g(r).abs().powf(p) * r, pieces)?;
            err.note(est.value, est.error);
            Ok((2.0 * PI * est.value).powf(1.0 / p))
        }
    }
}

/// Supremum of a normalised norm over a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NormBound {
    pub p: Exponent,
    pub constant: f64,
    pub t_argmax: f64,
    /// `(t, (1+t)^γ ‖·‖_{L^p})` per grid time.
    pub samples: Vec<(f64, f64)>,
}

impl NormBound {
    fn from_samples(p: Exponent, samples: Vec<(f64, f64)>) -> Self {
        let (t_argmax, constant) = samples
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |a, s| if s.1 > a.1 { s } else { a });
        Self {
            p,
            constant,
            t_argmax,
            samples,
        }
    }

    /// Relative change of the last two samples; small values mean the
    /// supremum is approached monotonically at the end of the grid.
    pub fn end_change(&self) -> f64 {
        match self.samples.as_slice() {
            [.., a, b] => ((b.1 - a.1) / b.1).abs(),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UchiNormBounds {
    pub a_p: Vec<NormBound>,
    pub b_p: Vec<NormBound>,
    pub max_rel_error: f64,
}

pub fn velocity_norm(c: &RadialCutoff, t: f64, p: Exponent, res: &Resolution) -> Result<f64> {
    let s = 1.0 + t;
    radial_norm(
        |r| truncated_swirl(r, t, c).0,
        p,
        &breaks(c, &[s], res.splits),
        res,
        &mut ErrorTracker::default(),
    )
}

fn gradient_magnitude(r: f64, t: f64, c: &RadialCutoff) -> f64 {
    let (u, du) = truncated_swirl(r, t, c);
    (u / r).hypot(du)
}

/// `â_p = max_t (1+t)^{1/2-1/p} ‖u^χ‖_{L^p}` for `p ∈ (2, ∞]` and
/// `b̂_p = max_t (1+t)^{1-1/p} ‖∇u^χ‖_{L^p}` for `p ∈ (1, ∞]`.
pub fn verify_uchi_norm_bounds(
    c: &RadialCutoff,
    t_grid: &[f64],
    p_velocity: &[Exponent],
    p_gradient: &[Exponent],
    res: &Resolution,
) -> Result<UchiNormBounds> {
    if let Some(p) = p_velocity.iter().find(|p| p.as_f64() <= 2.0) {
        return Err(Error::InvalidConfig(format!("velocity exponent {p} outside (2, inf]")));
    }
    if let Some(p) = p_gradient.iter().find(|p| p.as_f64() <= 1.0) {
        return Err(Error::InvalidConfig(format!("gradient exponent {p} outside (1, inf]")));
    }
    check_times(t_grid)?;
    let mut err = ErrorTracker::default();
    let mut a_p = Vec::new();
    for &p in p_velocity {
        let mut samples = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let s = 1.0 + t;
            let pieces = breaks(c, &[s], res.splits);
            let n = radial_norm(|r| truncated_swirl(r, t, c).0, p, &pieces, res, &mut err)?;
            samples.push((t, s.powf(0.5 - p.reciprocal()) * n));
        }
        a_p.push(NormBound::from_samples(p, samples));
    }
    let mut b_p = Vec::new();
    for &p in p_gradient {
        let mut samples = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let s = 1.0 + t;
            let pieces = breaks(c, &[s], res.splits);
            let n = radial_norm(|r| gradient_magnitude(r, t, c), p, &pieces, res, &mut err)?;
            samples.push((t, s.powf(1.0 - p.reciprocal()) * n));
        }
        b_p.push(NormBound::from_samples(p, samples));
    }
    Ok(UchiNormBounds {
        a_p,
        b_p,
        max_rel_error: err.0,
    })
}

fn check_times(ts: &[f64]) -> Result<()> {
    if ts.is_empty() || ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidConfig("times must be finite and nonnegative".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub s: f64,
    pub t: f64,
    /// `‖u^χ(t) - u^χ(s)‖²_{L²}`.
    pub lhs: f64,
    /// `lhs / |log((1+t)/(1+s))|`.
    pub log_ratio: f64,
    /// `lhs / |1/(1+t) - 1/(1+s)|`.
    pub inverse_ratio: f64,
}

impl PairSample {
    pub fn lambda(&self) -> f64 {
        (1.0 + self.t) / (1.0 + self.s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceBounds {
    pub kappa1: f64,
    pub kappa1_argmax: (f64, f64),
    pub kappa2: f64,
    pub kappa2_argmax: (f64, f64),
    pub samples: Vec<PairSample>,
    pub max_rel_error: f64,
}

/// Spread of the normalised log-ratio across pairs with `(1+t)/(1+s)` in
/// `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioClassSpread {
    /// `(max - min) / max` of the per-class maxima, across classes.
    pub across: f64,
    /// Largest `(max - min) / max` within one class (over `s`).
    pub within: f64,
    pub classes: usize,
}

impl DifferenceBounds {
    pub fn ratio_class_spread(&self, lo: f64, hi: f64) -> RatioClassSpread {
        let mut classes: Vec<(f64, Vec<f64>)> = Vec::new();
        for p in &self.samples {
            let l = p.lambda();
            if l < lo * (1.0 - 1e-9) || l > hi * (1.0 + 1e-9) {
                continue;
            }
            match classes.iter_mut().find(|(c, _)| ((c - l) / l).abs() < 1e-9) {
                Some((_, v)) => v.push(p.log_ratio),
                None => classes.push((l, vec![p.log_ratio])),
            }
        }
        let spread = |v: &[f64]| {
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            if max > 0.0 {
                (max - min) / max
            } else {
                0.0
            }
        };
        let maxima: Vec<f64> = classes
            .iter()
            .map(|(_, v)| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        RatioClassSpread {
            across: spread(&maxima),
            within: classes.iter().map(|(_, v)| spread(v)).fold(0.0, f64::max),
            classes: classes.len(),
        }
    }
}

/// `‖u^χ(t) - u^χ(s)‖²_{L²}` by radial quadrature.
pub fn velocity_difference_sq(c: &RadialCutoff, s: f64, t: f64, res: &Resolution) -> Result<f64> {
    let mut err = ErrorTracker::default();
    difference_sq(c, s, t, res, &mut err)
}

fn difference_sq(
    c: &RadialCutoff,
    s: f64,
    t: f64,
    res: &Resolution,
    err: &mut ErrorTracker,
) -> Result<f64> {
    if s == t {
        return Ok(0.0);
    }
    let (ss, st) = (1.0 + s, 1.0 + t);
    let pieces = breaks(c, &[ss, st], res.splits);
    let est = res.integrator().integrate_pieces(
        |r| {
            let r2 = r * r;
            // f_t - f_s = (E_s - E_t) / (2π r²), without cancellation.
            let d = if r2 < 1e-6 * ss.min(st) {
                velocity_factor(r2, t) - velocity_factor(r2, s)
            } else {
                ((-r2 / (4.0 * ss)).exp() - (-r2 / (4.0 * st)).exp()) / (2.0 * PI * r2)
            };
            let chi = c.value(r);
            let u = chi * r * d;
            u * u * r
        },
        &pieces,
    )?;
    err.note(est.value, est.error);
    Ok(2.0 * PI * est.value)
}

/// `κ̂1 = max lhs / |log((1+t)/(1+s))|` and
/// `κ̂2 = max lhs / |1/(1+t) - 1/(1+s)|` over the given pairs (`t = s`
/// excluded).
pub fn verify_uchi_difference_bounds(
    c: &RadialCutoff,
    pairs: &[(f64, f64)],
    res: &Resolution,
) -> Result<DifferenceBounds> {
    let mut err = ErrorTracker::default();
    let mut samples = Vec::new();
    for &(s, t) in pairs {
        check_times(&[s, t])?;
        if s == t {
            continue;
        }
        let lhs = difference_sq(c, s, t, res, &mut err)?;
        let log = ((1.0 + t) / (1.0 + s)).ln().abs();
        let inv = (1.0 / (1.0 + t) - 1.0 / (1.0 + s)).abs();
        samples.push(PairSample {
            s,
            t,
            lhs,
            log_ratio: lhs / log,
            inverse_ratio: lhs / inv,
        });
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let arg = |pick: fn(&PairSample) -> f64| {
        samples
            .iter()
            .fold((f64::NEG_INFINITY, (0.0, 0.0)), |a, p| {
                if pick(p) > a.0 {
                    (pick(p), (p.s, p.t))
                } else {
                    a
                }
            })
    };
    let (kappa1, kappa1_argmax) = arg(|p| p.log_ratio);
    let (kappa2, kappa2_argmax) = arg(|p| p.inverse_ratio);
    Ok(DifferenceBounds {
        kappa1,
        kappa1_argmax,
        kappa2,
        kappa2_argmax,
        samples,
        max_rel_error: err.0,
    })
}

/// First nonzero Neumann eigenvalue of `-Δ` on the annulus `a < r < b`.
///
/// Each angular mode `m` gives the radial problem
/// `-(r φ')' / r + m² φ / r² = μ φ`, `φ'(a) = φ'(b) = 0`, discretised by
/// cell-centred finite volumes into a symmetric tridiagonal matrix whose
/// eigenvalues are located by Sturm-sequence bisection.
pub fn annulus_neumann_eigenvalue(a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let centers: Vec<f64> = (0..cells).map(|i| a + (i as f64 + 0.5) * h).collect();
    let mut best = f64::INFINITY;
    for m in 0..4u32 {
        // M^{-1/2} A M^{-1/2} with mass M = diag(r_i h).
        let mut diag = vec![0.0; cells];
        let mut off = vec![0.0; cells.saturating_sub(1)];
        for i in 0..cells {
            let r = centers[i];
            let mut d = (m * m) as f64 * h / r;
            if i > 0 {
                d += (r - 0.5 * h) / h;
            }
            if i + 1 < cells {
                d += (r + 0.5 * h) / h;
                let flux = (r + 0.5 * h) / h;
                off[i] = -flux / ((r * h) * (centers[i + 1] * h)).sqrt();
            }
            diag[i] = d / (r * h);
        }
        // Mode 0 always has the constant eigenfunction (μ = 0).
        let k = if m == 0 { 1 } else { 0 };
        best = best.min(kth_eigenvalue(&diag, &off, k));
    }
    best
}

/// `k`-th smallest (0-based) eigenvalue of a symmetric tridiagonal matrix.
fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let count_below = |x: f64| {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..diag.len() {
            let e2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            q = diag[i] - x - if i > 0 { e2 / q } else { 0.0 };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bound = diag
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = off.get(i).map_or(0.0, |v| v.abs());
            d.abs() + l + r
        })
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (-bound - 1.0, bound + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Smooth vector field `Σ_k a_k cos(k·x) + b_k sin(k·x) + c` with
/// wavevectors on a lattice of spacing `2π / 4` and `|k|_∞ ≤ 3·2π/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigField {
    modes: Vec<([f64; 2], [f64; 2], [f64; 2])>,
    mean: [f64; 2],
}

impl TrigField {
    pub const BAND: i32 = 3;
    pub const PERIOD: f64 = 4.0;

    pub fn random(rng: &mut impl Rng) -> Self {
        let dk = 2.0 * PI / Self::PERIOD;
        let mut modes = Vec::new();
        for my in -Self::BAND..=Self::BAND {
            for mx in -Self::BAND..=Self::BAND {
                // Half lattice: (mx, my) and (-mx, -my) give the same mode.
                if my < 0 || (my == 0 && mx <= 0) {
                    continue;
                }
                let k = [mx as f64 * dk, my as f64 * dk];
                let damp = 1.0 / (1.0 + (mx * mx + my * my) as f64);
                let mut draw = || rng.gen_range(-1.0..1.0) * damp;
                modes.push((k, [draw(), draw()], [draw(), draw()]));
            }
        }
        let mean = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        Self { modes, mean }
    }

    pub fn constant(value: [f64; 2]) -> Self {
        Self {
            modes: Vec::new(),
            mean: value,
        }
    }

    /// Value and Jacobian `J[i][j] = ∂_j u_i` at `x`.
    pub fn eval(&self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let mut u = self.mean;
        let mut j = [[0.0; 2]; 2];
        for (k, a, b) in &self.modes {
            let (sn, cs) = (k[0] * x[0] + k[1] * x[1]).sin_cos();
            for i in 0..2 {
                u[i] += a[i] * cs + b[i] * sn;
                let d = -a[i] * sn + b[i] * cs;
                j[i][0] += d * k[0];
                j[i][1] += d * k[1];
            }
        }
        (u, j)
    }
}

/// Polar tensor rule on the annulus.
struct AnnulusRule {
    radial: Vec<(f64, f64)>,
    angles: Vec<(f64, f64)>,
}

impl AnnulusRule {
    fn new(c: &RadialCutoff, res: &Resolution) -> Self {
        let m = res.angular_points;
        Self {
            radial: composite_kronrod(c.r_inner(), c.r_outer(), res.radial_panels),
            angles: (0..m)
                .map(|k| (2.0 * PI * k as f64 / m as f64).sin_cos())
                .collect(),
        }
    }

    fn dtheta(&self) -> f64 {
        2.0 * PI / self.angles.len() as f64
    }

    /// Per radial node, `∫ (x⊥ · u) dθ`, and the total `‖∇u‖²_{L²(D)}`.
    fn moments(&self, u: &TrigField) -> (Vec<f64>, f64) {
        let dth = self.dtheta();
        let mut grad_sq = 0.0;
        let tangential = self
            .radial
            .iter()
            .map(|&(r, w)| {
                let mut acc = 0.0;
                for &(sn, cs) in &self.angles {
                    let x = [r * cs, r * sn];
                    let (v, j) = u.eval(x);
                    acc += -x[1] * v[0] + x[0] * v[1];
                    grad_sq += w * r * dth * (j[0][0].powi(2) + j[0][1].powi(2) + j[1][0].powi(2) + j[1][1].powi(2));
                }
                acc * dth
            })
            .collect();
        (tangential, grad_sq)
    }

    /// `∫_D R^χ(·, t) · u` from the tangential moments of `u`.
    fn pairing(&self, q: &[f64], tangential: &[f64]) -> f64 {
        self.radial
            .iter()
            .zip(q.iter().zip(tangential))
            .map(|(&(r, w), (q, m))| w * r * q * m)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingSample {
    pub field: usize,
    pub t: f64,
    pub pairing: f64,
    pub grad_norm: f64,
    /// `|⟨R^χ, u⟩| (1+t) / ‖∇u‖_{L²(D)}`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderBounds {
    /// `max (1+t) ‖R^χ‖_{L^p}` over the t-grid and exponents.
    pub kappa3: f64,
    /// `(t, p, (1+t) ‖R^χ‖_{L^p})`.
    pub table: Vec<(f64, Exponent, f64)>,
    /// Poincaré constant of `D` for mean-free fields, `μ₁^{-1/2}`.
    pub poincare: f64,
    /// `C_P max_t (1+t) ‖R^χ‖_{L²(D)}`, a rigorous constant for the pairing
    /// inequality since `R^χ` has zero mean on `D`.
    pub kappa3_prime: f64,
    pub samples: Vec<PairingSample>,
    pub max_ratio: f64,
    /// Largest `|⟨R^χ, e⟩|` over constant unit fields and pairing times.
    pub constant_pairing: f64,
    /// `(t, ratio)` with `u = R^χ(·, t)` itself.
    pub self_pairing: Vec<(f64, f64)>,
    pub max_rel_error: f64,
}

fn remainder_pieces(c: &RadialCutoff, splits: usize) -> Vec<f64> {
    let w = c.width();
    (0..=4 * splits)
        .map(|k| c.r_inner() + w * k as f64 / (4 * splits) as f64)
        .collect()
}

/// `‖R^χ(·, t)‖_{L^p}`.
pub fn remainder_norm(c: &RadialCutoff, t: f64, p: Exponent, res: &Resolution) -> Result<f64> {
    radial_norm(
        |r| r * remainder_factor(r, t, c),
        p,
        &remainder_pieces(c, res.splits),
        res,
        &mut ErrorTracker::default(),
    )
}

fn remainder_factor_dr(r: f64, t: f64, c: &RadialCutoff) -> f64 {
    let h = 1e-5 * c.width();
    let q = |x: f64| remainder_factor(x, t, c);
    (8.0 * (q(r + h) - q(r - h)) - (q(r + 2.0 * h) - q(r - 2.0 * h))) / (12.0 * h)
}

/// Checks the `L^p` bounds of `R^χ` and the pairing inequality
/// `|∫_D R^χ · u| ≤ κ3' (1+t)^{-1} ‖∇u‖_{L²(D)}` on seeded random fields.
pub fn verify_remainder_bounds(
    c: &RadialCutoff,
    t_grid: &[f64],
    p_list: &[Exponent],
    pairing_times: &[f64],
    n_random_fields: usize,
    seed: u64,
    res: &Resolution,
) -> Result<RemainderBounds> {
    check_times(t_grid)?;
    check_times(pairing_times)?;
    let mut err = ErrorTracker::default();
    let pieces = remainder_pieces(c, res.splits);
    let mut table = Vec::new();
    for &t in t_grid {
        for &p in p_list {
            let n = radial_norm(|r| r * remainder_factor(r, t, c), p, &pieces, res, &mut err)?;
            table.push((t, p, (1.0 + t) * n));
        }
    }
    let kappa3 = table.iter().map(|e| e.2).fold(0.0, f64::max);

    let poincare = 1.0 / annulus_neumann_eigenvalue(c.r_inner(), c.r_outer(), 2000).sqrt();
    let mut l2_sup: f64 = 0.0;
    for &t in t_grid.iter().chain(pairing_times) {
        let n = radial_norm(
            |r| r * remainder_factor(r, t, c),
            Exponent::Finite(2.0),
            &pieces,
            res,
            &mut err,
        )?;
        l2_sup = l2_sup.max((1.0 + t) * n);
    }
    let kappa3_prime = poincare * l2_sup;

    let rule = AnnulusRule::new(c, res);
    let q_at: Vec<Vec<f64>> = pairing_times
        .iter()
        .map(|&t| rule.radial.iter().map(|&(r, _)| remainder_factor(r, t, c)).collect())
        .collect();

    let mut constant_pairing: f64 = 0.0;
    for e in [[1.0, 0.0], [0.0, 1.0]] {
        let (m, _) = rule.moments(&TrigField::constant(e));
        for q in &q_at {
            constant_pairing = constant_pairing.max(rule.pairing(q, &m).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_random_fields * pairing_times.len());
    for field in 0..n_random_fields {
        let u = TrigField::random(&mut rng);
        let (m, grad_sq) = rule.moments(&u);
        let grad_norm = grad_sq.sqrt();
        for (&t, q) in pairing_times.iter().zip(&q_at) {
            let pairing = rule.pairing(q, &m);
            let ratio = pairing.abs() * (1.0 + t) / grad_norm;
            let sample = PairingSample {
                field,
                t,
                pairing,
                grad_norm,
                ratio,
            };
            if !(ratio <= kappa3_prime) {
                return Err(Error::InequalityViolated(format!(
                    "field {field} (seed {seed}) at t = {t}: ratio {ratio} > {kappa3_prime}"
                )));
            }
            samples.push(sample);
        }
    }
    let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);

    // Self-pairing: u = R^χ itself. The finite-difference Q' is noisy at
    // the ulp level, so a fixed composite rule replaces adaptivity here.
    let nodes = composite_kronrod(c.r_inner(), c.r_outer(), 8 * res.radial_panels);
    let mut self_pairing = Vec::new();
    for &t in pairing_times {
        let (mut rr, mut gr) = (0.0, 0.0);
        for &(r, w) in &nodes {
            let q = remainder_factor(r, t, c);
            let du = q + r * remainder_factor_dr(r, t, c);
            rr += w * (r * q).powi(2) * r;
            gr += w * (q * q + du * du) * r;
        }
        let pairing = 2.0 * PI * rr;
        let grad = (2.0 * PI * gr).sqrt();
        let ratio = if grad > 0.0 { pairing * (1.0 + t) / grad } else { 0.0 };
        if !(ratio <= kappa3_prime) {
            return Err(Error::InequalityViolated(format!(
                "self-pairing at t = {t}: ratio {ratio} > {kappa3_prime}"
            )));
        }
        self_pairing.push((t, ratio));
    }

    Ok(RemainderBounds {
        kappa3,
        table,
        poincare,
        kappa3_prime,
        samples,
        max_ratio,
        constant_pairing,
        self_pairing,
        max_rel_error: err.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub config: EstimateConfig,
    pub norms: UchiNormBounds,
    pub differences: DifferenceBounds,
    pub remainder: RemainderBounds,
}

impl EstimateReport {
    pub fn max_rel_error(&self) -> f64 {
        self.norms
            .max_rel_error
            .max(self.differences.max_rel_error)
            .max(self.remainder.max_rel_error)
    }

    /// Every fitted constant under a stable key, in report order.
    pub fn constants(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for b in &self.norms.a_p {
            out.push((format!("a_p.{}", b.p), b.constant));
        }
        for b in &self.norms.b_p {
            out.push((format!("b_p.{}", b.p), b.constant));
        }
        out.push(("kappa1".into(), self.differences.kappa1));
        out.push(("kappa2".into(), self.differences.kappa2));
        out.push(("kappa3".into(), self.remainder.kappa3));
        out.push(("kappa3_prime".into(), self.remainder.kappa3_prime));
        out
    }

    /// Plain-text `key = value` report.
    pub fn key_values(&self) -> String {
        use std::fmt::Write;
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(",");
        let cfg = &self.config;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("string write");
        kv("schema_version", "1".into());
        for (k, v) in self.constants() {
            kv(&k, format!("{v:e}"));
        }
        for b in self.norms.a_p.iter() {
            kv(&format!("a_p.{}.t_argmax", b.p), format!("{:e}", b.t_argmax));
        }
        for b in self.norms.b_p.iter() {
            kv(&format!("b_p.{}.t_argmax", b.p), format!("{:e}", b.t_argmax));
        }
        let d = &self.differences;
        kv("kappa1.argmax", format!("{:e},{:e}", d.kappa1_argmax.0, d.kappa1_argmax.1));
        kv("kappa2.argmax", format!("{:e},{:e}", d.kappa2_argmax.0, d.kappa2_argmax.1));
        let spread = d.ratio_class_spread(10.0, 1e3);
        kv("kappa1.class_spread_across", format!("{:e}", spread.across));
        kv("kappa1.class_spread_within", format!("{:e}", spread.within));
        let r = &self.remainder;
        kv("poincare_constant", format!("{:e}", r.poincare));
        kv("rchi2.samples", r.samples.len().to_string());
        kv("rchi2.max_ratio", format!("{:e}", r.max_ratio));
        kv("rchi2.constant_pairing_max", format!("{:e}", r.constant_pairing));
        kv(
            "rchi2.self_pairing_max",
            format!("{:e}", r.self_pairing.iter().map(|s| s.1).fold(0.0, f64::max)),
        );
        kv("max_rel_quadrature_error", format!("{:e}", self.max_rel_error()));
        kv("grid.t", join(&mut cfg.t_grid.iter().map(|t| format!("{t:e}"))));
        kv("grid.p_velocity", join(&mut cfg.p_velocity.iter().map(|p| p.to_string())));
        kv("grid.p_gradient", join(&mut cfg.p_gradient.iter().map(|p| p.to_string())));
        kv("grid.p_remainder", join(&mut cfg.p_remainder.iter().map(|p| p.to_string())));
        kv("grid.pairing_t", join(&mut cfg.pairing_times.iter().map(|t| format!("{t:e}"))));
        kv(
            "grid.pairs",
            join(&mut cfg.pairs.iter().map(|(s, t)| format!("{s:e}:{t:e}"))),
        );
        kv("random_fields", cfg.n_random_fields.to_string());
        kv("seed", cfg.seed.to_string());
        kv("cutoff.r_inner", format!("{:e}", cfg.cutoff.r_inner()));
        kv("cutoff.r_outer", format!("{:e}", cfg.cutoff.r_outer()));
        s
    }

    /// CSV tables `(file stem, header, rows)`.
    pub fn tables(&self) -> Vec<(&'static str, &'static str, Vec<String>)> {
        let norm_rows = |bounds: &[NormBound]| {
            bounds
                .iter()
                .flat_map(|b| b.samples.iter().map(move |(t, v)| format!("{t:e},{},{v:e}", b.p)))
                .collect()
        };
        vec![
            ("uchi_velocity", "t,p,scaled_norm", norm_rows(&self.norms.a_p)),
            ("uchi_gradient", "t,p,scaled_norm", norm_rows(&self.norms.b_p)),
            (
                "uchi_difference",
                "s,t,lhs,log_ratio,inverse_ratio",
                self.differences
                    .samples
                    .iter()
                    .map(|p| format!("{:e},{:e},{:e},{:e},{:e}", p.s, p.t, p.lhs, p.log_ratio, p.inverse_ratio))
                    .collect(),
            ),
            (
                "remainder_norm",
                "t,p,scaled_norm",
                self.remainder
                    .table
                    .iter()
                    .map(|(t, p, v)| format!("{t:e},{p},{v:e}"))
                    .collect(),
            ),
            (
                "remainder_pairing",
                "field,t,pairing,grad_norm,ratio",
                self.remainder
                    .samples
                    .iter()
                    .map(|s| format!("{},{:e},{:e},{:e},{:e}", s.field, s.t, s.pairing, s.grad_norm, s.ratio))
                    .collect(),
            ),
        ]
    }
}

/// Runs every check of this module.
pub fn verify_all(cfg: &EstimateConfig) -> Result<EstimateReport> {
    let res = &cfg.resolution;
    let norms = verify_uchi_norm_bounds(&cfg.cutoff, &cfg.t_grid, &cfg.p_velocity, &cfg.p_gradient, res)?;
    let differences = verify_uchi_difference_bounds(&cfg.cutoff, &cfg.pairs, res)?;
    let remainder = verify_remainder_bounds(
        &cfg.cutoff,
        &cfg.t_grid,
        &cfg.p_remainder,
        &cfg.pairing_times,
        cfg.n_random_fields,
        cfg.seed,
        res,
    )?;
    Ok(EstimateReport {
        config: cfg.clone(),
        norms,
        differences,
        remainder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linf_at_time_zero_matches_direct_maximisation() {
        let c = RadialCutoff::default();
        let res = Resolution::default();
        let v = velocity_norm(&c, 0.0, Exponent::Infinity, &res).unwrap();
        let (_, direct) = maximize(
            |r| c.value(r) * (1.0 - (-r * r / 4.0).exp()) / (2.0 * PI * r),
            1e-9,
            50.0,
            20_000,
        );
        assert!(((v - direct) / direct).abs() < 1e-10, "{v} {direct}");
    }

    #[test]
    fn truncated_velocity_below_oseen_sup() {
        let c = RadialCutoff::default();
        let res = Resolution::default();
        for t in [0.0f64, 1.0, 30.0, 1e3] {
            let s = 1.0 + t;
            let (_, oseen) = maximize(|r| r * velocity_factor(r * r, t), 1e-9, 20.0 * s.sqrt(), 20_000);
            assert!(velocity_norm(&c, t, Exponent::Infinity, &res).unwrap() <= oseen * (1.0 + 1e-12));
        }
    }

    #[test]
    fn disk_eigenvalue_limit() {
        // Thin annulus around radius R: the m = 1 mode tends to 1/R².
        let mu = annulus_neumann_eigenvalue(10.0, 10.01, 200);
        let expected = 1.0 / (10.005f64 * 10.005);
        assert!(((mu - expected) / expected).abs() < 1e-5, "{mu}");
    }

    #[test]
    fn neumann_eigenvalue_converges() {
        let a = annulus_neumann_eigenvalue(1.0, 2.0, 500);
        let b = annulus_neumann_eigenvalue(1.0, 2.0, 1000);
        assert!((a - b).abs() < 1e-5 * b);
    }

    #[test]
    fn tridiagonal_bisection() {
        // Path-graph Laplacian: eigenvalues 2 - 2 cos(kπ/(n+1)).
        let n = 10;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        for k in 0..n {
            let exact = 2.0 - 2.0 * (PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((kth_eigenvalue(&diag, &off, k) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn trig_field_gradient_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = TrigField::random(&mut rng);
        let x = [0.3, -1.4];
        let (_, j) = u.eval(x);
        let h = 1e-6;
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            let (up, _) = u.eval(xp);
            let (um, _) = u.eval(xm);
            for i in 0..2 {
                assert!((j[i][d] - (up[i] - um[i]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn difference_is_symmetric_and_zero_on_diagonal() {
        let c = RadialCutoff::default();
        let res = Resolution::default();
        assert_eq!(velocity_difference_sq(&c, 3.0, 3.0, &res).unwrap(), 0.0);
        let a = velocity_difference_sq(&c, 0.0, 5.0, &res).unwrap();
        let b = velocity_difference_sq(&c, 5.0, 0.0, &res).unwrap();
        assert!(((a - b) / a).abs() < 1e-10);
    }

    #[test]
    fn rejects_exponents_outside_range() {
        let c = RadialCutoff::default();
        let res = Resolution::default();
        let two = [Exponent::new(2.0)];
        let ok = [Exponent::new(2.0)];
        assert!(verify_uchi_norm_bounds(&c, &[0.0], &two, &ok, &res).is_err());
        let one = [Exponent::new(1.0)];
        assert!(verify_uchi_norm_bounds(&c, &[0.0], &[Exponent::new(3.0)], &one, &res).is_err());
    }
}
