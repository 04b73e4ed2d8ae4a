//! Frozen reference values and closed-form oracles across modules.

use std::f64::consts::PI;

use oseen_core::decay::{decay_experiment, DecayWindow};
use oseen_core::diagnostics::{
    energy_identity_residual, fit_power_law, log_energy_envelope, record, series, RateModel,
};
use oseen_core::estimates::{velocity_difference_sq, Resolution};
use oseen_core::fields::{biot_savart, curl, lp_norm, total_circulation, Exponent};
use oseen_core::grid::{sample_scalar, sample_vector};
use oseen_core::presets::InitPreset;
use oseen_core::profiles::{
    oseen_gap, oseen_velocity, oseen_vorticity, truncated_velocity, truncated_vorticity,
};
use oseen_core::quadrature::Integrator;
use oseen_core::solver::{run, SolverConfig, SolverState};
use oseen_core::{Grid, RadialCutoff, ScalarField, SpaceTime};

fn at(x: f64, y: f64, t: f64) -> SpaceTime {
    SpaceTime::new([x, y], t)
}

#[test]
fn closed_form_profile_values() {
    let u = oseen_velocity(at(2.0, 0.0, 0.0));
    assert_eq!(u[0], 0.0);
    assert!((u[1] - (1.0 - (-1.0f64).exp()) / (4.0 * PI)).abs() < 1e-15);
    assert!((u[1] - 0.050_302_6).abs() < 1e-7);
    assert!((oseen_vorticity(at(0.0, 0.0, 0.0)) - 0.079_577_5).abs() < 1e-7);
    assert!((oseen_vorticity(at(0.0, 0.0, 3.0)) - 1.0 / (16.0 * PI)).abs() < 1e-16);
    let far = oseen_velocity(at(0.0, 100.0, 0.0));
    let m = far[0].hypot(far[1]);
    assert!((m * 2.0 * PI * 100.0 - 1.0).abs() < 1e-3);
}

#[test]
fn sampled_profiles_have_unit_circulation() {
    // The cut-off annulus needs h ≲ 0.05 for 1e-6; at h ≈ 0.1 ω^χ is off by 3e-5.
    let g = Grid::new(512, 12.0).unwrap();
    let c = RadialCutoff::default();
    let xi = sample_scalar(g, 0.0, oseen_vorticity);
    let wchi = sample_scalar(g, 0.0, |p| truncated_vorticity(p, &c));
    assert!((total_circulation(&xi) - 1.0).abs() < 1e-6);
    assert!((total_circulation(&wchi) - 1.0).abs() < 1e-6);
}

#[test]
fn curl_of_truncated_velocity_is_truncated_vorticity() {
    // u^χ decays like 1/|x|, so compare the compactly supported gaps.
    // Spectral convergence: the error drops by more than 10x per doubling.
    let c = RadialCutoff::default();
    let t = 0.5;
    let err = |n: usize| {
        let g = Grid::new(n, 12.0).unwrap();
        let gap = sample_vector(g, t, |p| oseen_gap(p, &c).0);
        let mut d = curl(&gap);
        let expected = ScalarField::from_fn(g, |x| {
            let p = SpaceTime::new(x, t);
            oseen_vorticity(p) - truncated_vorticity(p, &c)
        });
        d.axpy(-1.0, &expected).unwrap();
        d.max_abs() / expected.max_abs()
    };
    let (coarse, fine) = (err(256), err(512));
    assert!(fine < 1e-3 && fine < coarse / 10.0, "{coarse} -> {fine}");
}

#[test]
fn radial_biot_savart_oracle() {
    // u_θ(r) = (1/r) ∫₀^r s ω(s) ds for a mean-free difference of Gaussians.
    let g = Grid::new(256, 20.0).unwrap();
    let omega_r = |r: f64| {
        let r2 = r * r;
        (-r2 / 4.0).exp() / (4.0 * PI) - (-r2 / 8.0).exp() / (8.0 * PI)
    };
    let w = ScalarField::from_fn(g, |x| omega_r(x[0].hypot(x[1])));
    let mut w = w;
    let mean = w.values().iter().sum::<f64>() / g.len() as f64;
    w.values_mut().iter_mut().for_each(|v| *v -= mean);
    let u = biot_savart(&w).unwrap();
    let quad = Integrator::with_rel_tol(1e-12);
    let mut max_err: f64 = 0.0;
    let mut max_u: f64 = 0.0;
    for (k, x) in g.points() {
        let r = x[0].hypot(x[1]);
        if r > g.half_width() / 4.0 || r == 0.0 {
            continue;
        }
        let ut = quad.integrate(|s| s * omega_r(s), 0.0, r).unwrap().value / r;
        let exact = [-x[1] / r * ut, x[0] / r * ut];
        let e = u.at(k);
        max_err = max_err.max((e[0] - exact[0]).hypot(e[1] - exact[1]));
        max_u = max_u.max(ut.abs());
    }
    assert!(max_err <= 1e-3 * max_u, "{max_err} vs {max_u}");
}

#[test]
fn background_only_distances_match_the_gap() {
    let g = Grid::new(256, 16.0).unwrap();
    let cfg = SolverConfig::new(g, 0.1, 0.0, 1.0);
    let state = SolverState {
        t: 0.0,
        zeta: ScalarField::zeros(g),
    };
    let r = record(&state, &cfg);
    let c = cfg.cutoff;
    // ‖(1 - χ)Θ‖ on the grid through the sampled fields directly.
    let mut diff = sample_vector(g, 0.0, |p| truncated_velocity(p, &c));
    diff.axpy(-1.0, &sample_vector(g, 0.0, oseen_velocity)).unwrap();
    let direct = lp_norm(&diff, Exponent::Finite(2.0), None);
    assert!((r.l2_dist_oseen - direct).abs() < 1e-12);
    // and by radial quadrature: 2π ∫ ((1-χ) r f)² r dr.
    let quad = Integrator::with_rel_tol(1e-12);
    let sq = quad
        .integrate(
            |s| {
                let u = (1.0 - c.value(s)) * oseen_velocity(at(s, 0.0, 0.0))[1];
                u * u * s
            },
            0.0,
            c.r_outer(),
        )
        .unwrap()
        .value;
    assert!((r.l2_dist_oseen - (2.0 * PI * sq).sqrt()).abs() < 1e-4);

    let zero_cfg = SolverConfig::new(g, 0.1, 0.0, 0.0);
    let z = record(&state, &zero_cfg);
    assert_eq!(
        [z.l2_v, z.h1_v, z.l2_dist_oseen, z.h1_dist_oseen, z.l1_vort_dist, z.tail_mass],
        [0.0; 6]
    );
}

#[test]
fn zero_length_run_has_one_record() {
    let g = Grid::new(32, 8.0).unwrap();
    let cfg = SolverConfig::new(g, 0.1, 0.0, 0.5);
    let traj = run(&cfg, (0.5, ScalarField::zeros(g)), 1).unwrap();
    assert_eq!(traj.records.len(), 1);
    assert_eq!(energy_identity_residual(&traj).unwrap_or(0.0), 0.0);
}

#[test]
fn unperturbed_background_gap_decays_like_inverse_time() {
    // h = 0.31 resolves the cut-off annulus; at h = 0.62 the gap stalls near 1e-2.
    let g = Grid::new(256, 40.0).unwrap();
    let cfg = SolverConfig::new(g, 0.25, 60.0, 1.0);
    let out = decay_experiment(
        4.0 / 3.0,
        1.0,
        &InitPreset::Dipole,
        0.0,
        &cfg,
        DecayWindow { t_min: 20.0, t_max: 60.0, diag_steps: 8 },
    )
    .unwrap();
    let s = series(&out.trajectory.records, |r| r.l2_dist_oseen);
    let fit = fit_power_law(&s, (20.0, 60.0), RateModel::Power).unwrap();
    assert!(fit.exponent <= -0.8, "{fit:?}");
}

#[test]
fn zero_circulation_envelope_is_at_least_one() {
    let g = Grid::new(64, 10.0).unwrap();
    let cfg = SolverConfig::new(g, 0.02, 1.0, 0.0);
    let out = decay_experiment(
        4.0 / 3.0,
        0.0,
        &InitPreset::Quadrupole,
        0.5,
        &cfg,
        DecayWindow { t_min: 0.1, t_max: 1.0, diag_steps: 5 },
    )
    .unwrap();
    let v0 = out.trajectory.records[0].l2_v;
    let env = log_energy_envelope(&out.trajectory, 0.0, v0);
    assert!(env.k_hat >= 1.0 - 1e-12 && env.k_hat.is_finite());
    assert!(energy_identity_residual(&out.trajectory).unwrap() < 1e-4);
}

#[test]
fn brute_force_difference_norm() {
    // 2D grid sum of |u^χ(1) - u^χ(0)|² against the radial quadrature.
    let c = RadialCutoff::default();
    let g = Grid::new(1024, 60.0).unwrap();
    let a = sample_vector(g, 1.0, |p| truncated_velocity(p, &c));
    let mut d = sample_vector(g, 0.0, |p| truncated_velocity(p, &c));
    d.axpy(-1.0, &a).unwrap();
    let brute = lp_norm(&d, Exponent::Finite(2.0), None).powi(2);
    let exact = velocity_difference_sq(&c, 0.0, 1.0, &Resolution::default()).unwrap();
    assert!(((brute - exact) / exact).abs() < 0.05, "{brute} vs {exact}");
}
