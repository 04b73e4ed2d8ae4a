//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::info;

use oseen_core::decay::{decay_experiment, fit_decay, DecayOutcome, DecayWindow, Tracked};
use oseen_core::diagnostics::{
    energy_identity_residual, log_energy_envelope, DiagnosticRecord, CSV_COLUMNS,
};
use oseen_core::estimates::verify_all;
use oseen_core::fields::{lp_norm, Exponent};
use oseen_core::grid::sample_scalar;
use oseen_core::presets::initial_vorticity;
use oseen_core::profiles::oseen_vorticity;
use oseen_core::snapshot::{Snapshot, SnapshotKind};
use oseen_core::solver::{decompose_initial_data, total_vorticity, Solver, SolverState};

use crate::config::{ExperimentConfig, StudyKind};
use crate::output::{header, write_csv, write_text, write_trajectory, KeyValues, SCHEMA_VERSION};
use crate::CliError;

pub struct Context {
    pub cfg: ExperimentConfig,
    /// Directory against which relative input paths resolve.
    pub base: PathBuf,
    pub out: PathBuf,
    pub jobs: usize,
}

impl Context {
    fn prepare(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", self.out.display())))
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))
}

fn runtime(e: oseen_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Dispatches on `study.kind`.
pub fn study(ctx: &Context) -> Result<(), CliError> {
    match ctx.cfg.study_kind() {
        StudyKind::Run => run(ctx),
        StudyKind::VerifyLemmas => verify_lemmas(ctx),
        StudyKind::Decay => decay_study(ctx),
    }
}

/// Single trajectory: `trajectory.csv`, `summary.txt` and snapshots.
pub fn run(ctx: &Context) -> Result<(), CliError> {
    ctx.prepare()?;
    let cfg = &ctx.cfg;
    let grid = cfg.grid();
    let cutoff = cfg.cutoff();
    let preset = cfg.init_preset(&ctx.base);
    let omega0 = initial_vorticity(&preset, grid, cfg.vortex.alpha, cfg.init.amplitude, &cutoff)
        .map_err(runtime)?;
    let (alpha, zeta0) = decompose_initial_data(&omega0, &cutoff);
    info!("run: preset {}, alpha = {alpha}, n = {}", preset.name(), grid.n());
    let mut solver = Solver::new(cfg.solver_config(alpha)).map_err(runtime)?;
    // The final state is always captured; it feeds the error against the
    // Oseen vortex but is only written when requested.
    let mut times = cfg.output.snapshot_times.clone();
    times.push(cfg.time.t_end);
    let mut traj = solver
        .run(SolverState { t: 0.0, zeta: zeta0 }, cfg.diag_steps(), &times)
        .map_err(runtime)?;
    let final_state = traj.snapshots.pop().expect("final state requested");

    let path = ctx.out.join("trajectory.csv");
    write_trajectory(&path, &header("trajectory", cfg), &traj.records).map_err(io(&path))?;

    let mut kv = KeyValues::default();
    kv.push("schema_version", SCHEMA_VERSION);
    kv.push("kind", "run_summary");
    kv.push("preset", preset.name());
    kv.num("alpha", alpha);
    kv.push("records", traj.records.len());
    let last = traj.last();
    for (name, v) in CSV_COLUMNS.iter().zip(last.row()) {
        kv.num(format!("final.{name}"), v);
    }
    let circ_dev = traj
        .records
        .iter()
        .map(|r| (r.circulation - alpha).abs())
        .fold(0.0, f64::max);
    kv.num("max_circulation_deviation", circ_dev);
    if alpha == 0.0 {
        kv.num("energy_identity_residual", energy_identity_residual(&traj).map_err(runtime)?);
    }
    if alpha != 0.0 {
        let omega = total_vorticity(&final_state, alpha, &cutoff);
        let mut xi = sample_scalar(grid, final_state.t, oseen_vorticity);
        xi.scale(alpha);
        let mut err = omega;
        err.axpy(-1.0, &xi).map_err(runtime)?;
        let two = Exponent::Finite(2.0);
        kv.num("final_rel_l2_vort_err", lp_norm(&err, two, None) / lp_norm(&xi, two, None));
    }
    for (i, s) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:03}.bin");
        let path = ctx.out.join(&name);
        let omega = total_vorticity(s, alpha, &cutoff);
        Snapshot::scalar(SnapshotKind::TotalVorticity, s.t, &omega)
            .save(&path)
            .map_err(runtime)?;
        kv.push(format!("snapshot.{i:03}"), format!("{name} {:e}", s.t));
    }
    let path = ctx.out.join("summary.txt");
    write_text(&path, &header("run_summary", cfg), &kv.render()).map_err(io(&path))?;
    Ok(())
}

/// Estimate report plus one CSV table per bound.
pub fn verify_lemmas(ctx: &Context) -> Result<(), CliError> {
    ctx.prepare()?;
    let est = ctx.cfg.estimate_config();
    let report = verify_all(&est).map_err(runtime)?;
    let head = header("estimate_report", &ctx.cfg);
    let path = ctx.out.join("estimates.txt");
    write_text(&path, &head, &report.key_values()).map_err(io(&path))?;
    for (stem, columns, rows) in report.tables() {
        let path = ctx.out.join(format!("{stem}.csv"));
        let cols: Vec<&str> = columns.split(',').collect();
        write_csv(
            &path,
            &header(stem, &ctx.cfg),
            &cols,
            rows.into_iter().map(|r| r.split(',').map(str::to_string).collect()),
        )
        .map_err(io(&path))?;
    }
    Ok(())
}

/// Runs `cells` closures on up to `jobs` threads; results keep input order.
fn parallel<T: Send>(jobs: usize, cells: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..cells).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, cells.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cells {
                    break;
                }
                let r = f(i);
                results.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

/// Decay runs over `study.alphas`, one trajectory CSV each, plus
/// `decay_summary.txt` with the fits and the energy envelope.
pub fn decay_study(ctx: &Context) -> Result<(), CliError> {
    ctx.prepare()?;
    let cfg = &ctx.cfg;
    let alphas = cfg.alphas();
    let (t_min, t_max) = cfg.fit_window();
    let window = DecayWindow {
        t_min,
        t_max,
        diag_steps: cfg.diag_steps(),
    };
    let preset = cfg.init_preset(&ctx.base);
    let outcomes: Vec<Result<DecayOutcome, oseen_core::Error>> = parallel(ctx.jobs, alphas.len(), |i| {
        info!("decay cell {i}: alpha = {}", alphas[i]);
        decay_experiment(
            cfg.study.q,
            alphas[i],
            &preset,
            cfg.init.amplitude,
            &cfg.solver_config(alphas[i]),
            window,
        )
    });
    let mut kv = KeyValues::default();
    kv.push("schema_version", SCHEMA_VERSION);
    kv.push("kind", "decay_summary");
    kv.num("q", cfg.study.q);
    kv.num("fit.t_min", t_min);
    kv.num("fit.t_max", t_max);
    kv.push("cells", alphas.len());
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let outcome = outcome.map_err(runtime)?;
        let name = format!("decay_{i:03}.csv");
        let path = ctx.out.join(&name);
        write_trajectory(&path, &header("trajectory", cfg), &outcome.trajectory.records)
            .map_err(io(&path))?;
        let p = format!("cell.{i:03}");
        kv.push(format!("{p}.file"), &name);
        kv.num(format!("{p}.alpha"), outcome.trajectory.alpha);
        kv.num(format!("{p}.mu"), outcome.mu);
        push_fits(&mut kv, &p, &outcome.fits);
        let v0 = outcome.trajectory.records[0].l2_v;
        let env = log_energy_envelope(&outcome.trajectory, outcome.trajectory.alpha, v0);
        kv.num(format!("{p}.envelope.k_hat"), env.k_hat);
    }
    let path = ctx.out.join("decay_summary.txt");
    write_text(&path, &header("decay_summary", cfg), &kv.render()).map_err(io(&path))?;
    Ok(())
}

fn push_fits(kv: &mut KeyValues, prefix: &str, fits: &[(Tracked, oseen_core::diagnostics::RateFit)]) {
    for (q, f) in fits {
        let k = format!("{prefix}.{}", q.name());
        kv.push(format!("{k}.model"), f.model);
        kv.num(format!("{k}.exponent"), f.exponent);
        kv.num(format!("{k}.amplitude"), f.amplitude);
        kv.num(format!("{k}.residual"), f.residual);
    }
}

/// Reads a trajectory CSV written by `run` or `decay-study`.
pub fn read_trajectory(path: &Path) -> Result<Vec<DiagnosticRecord>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let invalid = |m: String| CliError::Validation(format!("{}: {m}", path.display()));
    let version = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.trim_start_matches('#').trim().strip_prefix("schema_version = "))
        .ok_or_else(|| invalid("missing schema_version header".into()))?;
    if version.trim() != SCHEMA_VERSION.to_string() {
        return Err(invalid(format!("unsupported schema_version {version}")));
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| invalid(e.to_string()))?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(invalid(format!("unexpected columns {headers:?}")));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| invalid(e.to_string()))?;
        let mut vals = [0.0; 9];
        for (v, s) in vals.iter_mut().zip(row.iter()) {
            *v = s.parse().map_err(|_| invalid(format!("bad number {s:?}")))?;
        }
        records.push(DiagnosticRecord::from_row(&vals));
    }
    Ok(records)
}

/// Fitted rates for each input CSV, as key-value text.
pub fn report(inputs: &[PathBuf], q: f64, window: (f64, f64)) -> Result<String, CliError> {
    let mu = oseen_core::decay::decay_exponent(q).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut kv = KeyValues::default();
    kv.push("schema_version", SCHEMA_VERSION);
    kv.push("kind", "rate_report");
    kv.num("q", q);
    kv.num("fit.t_min", window.0);
    kv.num("fit.t_max", window.1);
    for (i, path) in inputs.iter().enumerate() {
        let records = read_trajectory(path)?;
        let p = format!("input.{i:03}");
        kv.push(format!("{p}.file"), path.display());
        kv.push(format!("{p}.records"), records.len());
        push_fits(&mut kv, &p, &fit_decay(&records, mu, window));
    }
    Ok(kv.render())
}
