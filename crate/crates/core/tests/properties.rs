use proptest::prelude::*;

use oseen_core::diagnostics::{fit_power_law, mass_outside, RateModel};
use oseen_core::fields::{lp_norm, weak_l2_quasinorm, Exponent};
use oseen_core::presets::dipole;
use oseen_core::solver::{Solver, SolverConfig, SolverState};
use oseen_core::{Grid, ScalarField, VectorField};

fn grid() -> Grid {
    Grid::new(32, 6.0).unwrap()
}

fn field(seed: &[f64]) -> ScalarField {
    let g = grid();
    let k = std::f64::consts::PI / g.half_width();
    ScalarField::from_fn(g, |x| {
        seed.iter()
            .enumerate()
            .map(|(m, a)| a * ((m as f64 + 1.0) * k * x[0] + m as f64 * k * x[1]).sin())
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weak_norm_is_homogeneous(a in coeffs(), c in -5.0..5.0f64) {
        let f = field(&a);
        let u = VectorField::from_components(f.clone(), f.scaled(0.5)).unwrap();
        let mut cu = u.clone();
        cu.scale(c);
        let lhs = weak_l2_quasinorm(&cu);
        let rhs = c.abs() * weak_l2_quasinorm(&u);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn masked_norms_are_monotone(a in coeffs(), p in 1.0..6.0f64, r1 in 0.5..3.0f64, dr in 0.0..3.0f64) {
        let f = field(&a);
        let g = grid();
        let inner: Vec<bool> = g.points().map(|(_, x)| x[0].hypot(x[1]) <= r1).collect();
        let outer: Vec<bool> = g.points().map(|(_, x)| x[0].hypot(x[1]) <= r1 + dr).collect();
        for e in [Exponent::Finite(p), Exponent::Infinity] {
            let a = lp_norm(&f, e, Some(&inner));
            let b = lp_norm(&f, e, Some(&outer));
            let all = lp_norm(&f, e, None);
            prop_assert!(a <= b * (1.0 + 1e-12) && b <= all * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mass_outside_shrinks_with_radius(a in coeffs(), r in 0.0..8.0f64, dr in 0.0..4.0f64) {
        let f = field(&a);
        prop_assert!(mass_outside(&f, r + dr) <= mass_outside(&f, r));
    }

    #[test]
    fn fits_are_scale_equivariant(e in -2.0..0.5f64, amp in 0.1..10.0f64, c in 0.1..10.0f64) {
        let base: Vec<(f64, f64)> = (1..40).map(|k| {
            let t = 2.0 + k as f64;
            (t, amp * t.powf(e) * (1.0 + 0.01 * (k as f64).sin()))
        }).collect();
        let scaled: Vec<(f64, f64)> = base.iter().map(|&(t, y)| (t, c * y)).collect();
        for model in [RateModel::Power, RateModel::PowerLog] {
            let a = fit_power_law(&base, (3.0, 41.0), model).unwrap();
            let b = fit_power_law(&scaled, (3.0, 41.0), model).unwrap();
            prop_assert!((a.exponent - b.exponent).abs() < 1e-9);
            prop_assert!((b.amplitude / a.amplitude - c).abs() < 1e-9 * c);
            prop_assert!((a.residual - b.residual).abs() < 1e-9);
        }
    }

    #[test]
    fn solver_commutes_with_translations(a in coeffs(), di in 0usize..32, dj in 0usize..32) {
        let g = grid();
        let mut zeta = field(&a);
        zeta.scale(0.2);
        let mut solver = Solver::new(SolverConfig::new(g, 0.05, 0.1, 0.0)).unwrap();
        let step = |s: &mut Solver, z: ScalarField| s.step(&SolverState { t: 0.0, zeta: z }).unwrap().zeta;
        let shifted_then_stepped = step(&mut solver, zeta.roll(di, dj));
        let stepped_then_shifted = step(&mut solver, zeta).roll(di, dj);
        let mut d = shifted_then_stepped;
        d.axpy(-1.0, &stepped_then_shifted).unwrap();
        prop_assert!(d.max_abs() < 1e-12);
    }
}

#[test]
fn dissipation_integral_never_decreases() {
    let g = Grid::new(64, 10.0).unwrap();
    for (alpha, amp) in [(0.0, 0.8), (0.7, 0.3), (-1.2, 0.5)] {
        let mut cfg = SolverConfig::new(g, 0.02, 2.0, alpha);
        cfg.params.alpha = alpha;
        let mut solver = Solver::new(cfg).unwrap();
        let traj = solver
            .run(SolverState { t: 0.0, zeta: dipole(g, amp) }, 5, &[])
            .unwrap();
        for w in traj.records.windows(2) {
            assert!(w[1].dissipation_integral >= w[0].dissipation_integral);
        }
    }
}
