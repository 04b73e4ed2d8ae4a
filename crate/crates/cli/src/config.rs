//! Experiment configuration files (TOML).
//!
//! Every section and key is optional; missing entries take the defaults
//! documented in `docs/config.md`. Unknown keys are rejected. Validation
//! collects every violation instead of stopping at the first.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use oseen_core::estimates::EstimateConfig;
use oseen_core::presets::InitPreset;
use oseen_core::solver::{ForcingRoute, Penalization, SolverConfig};
use oseen_core::{Grid, RadialCutoff};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}", format_violations(.0))]
    Schema(Vec<SchemaError>),
}

fn format_violations(v: &[SchemaError]) -> String {
    let lines: Vec<String> = v.iter().map(|e| format!("  {e}")).collect();
    format!("invalid configuration:\n{}", lines.join("\n"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n: 256,
            half_width: 40.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    /// Record spacing in time units; rounded to a whole number of steps.
    pub diag_interval: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 10.0,
            diag_interval: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VortexSection {
    pub alpha: f64,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for VortexSection {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            r_inner: 1.0,
            r_outer: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    pub preset: String,
    pub amplitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file_path: Option<PathBuf>,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            preset: "dipole".into(),
            amplitude: 1.0,
            file_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenalizationSection {
    pub enabled: bool,
    pub epsilon: f64,
    pub obstacle_radius: f64,
}

impl Default for PenalizationSection {
    fn default() -> Self {
        Self {
            enabled: false,
            epsilon: 1e-2,
            obstacle_radius: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub dealias: bool,
    pub cfl: f64,
    /// `heat_defect` or `curl_remainder`.
    pub forcing: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            dealias: true,
            cfl: oseen_core::solver::DEFAULT_CFL,
            forcing: ForcingRoute::default().name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshot_times: Vec<f64>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "output".into(),
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    /// `run`, `verify-lemmas` or `decay`.
    pub kind: String,
    pub q: f64,
    pub seed: u64,
    /// Random test fields for the remainder pairing check.
    pub random_fields: usize,
    /// Circulations swept by a decay study; empty means `[vortex.alpha]`.
    pub alphas: Vec<f64>,
    /// Fit window `[t_min, t_max]`; empty means `[10, time.t_end]`.
    pub fit_window: Vec<f64>,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            kind: "run".into(),
            q: 4.0 / 3.0,
            seed: 0,
            random_fields: 100,
            alphas: Vec::new(),
            fit_window: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub time: TimeSection,
    pub vortex: VortexSection,
    pub init: InitSection,
    pub penalization: PenalizationSection,
    pub solver: SolverSection,
    pub output: OutputSection,
    pub study: StudySection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Run,
    VerifyLemmas,
    Decay,
}

impl StudyKind {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "run" => Some(Self::Run),
            "verify-lemmas" => Some(Self::VerifyLemmas),
            "decay" => Some(Self::Decay),
            _ => None,
        }
    }
}

const PRESETS: [&str; 4] = ["oseen", "dipole", "quadrupole", "file"];

impl ExperimentConfig {
    /// Parses TOML text and validates it.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            ConfigError::Schema(vec![SchemaError {
                field: "<file>".into(),
                reason: e.message().trim().to_string(),
            }])
        })?;
        let violations = cfg.violations();
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Schema(violations))
        }
    }

    /// Resolved configuration as TOML, defaults filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn violations(&self) -> Vec<SchemaError> {
        let mut v = Vec::new();
        let mut bad = |field: &str, reason: String| {
            v.push(SchemaError {
                field: field.into(),
                reason,
            })
        };
        let positive = |x: f64| x.is_finite() && x > 0.0;

        let n = self.grid.n;
        if n < 16 || !n.is_power_of_two() {
            bad("grid.n", format!("must be a power of two >= 16, got {n}"));
        }
        if !positive(self.grid.half_width) {
            bad("grid.half_width", "must be positive".into());
        }
        if !positive(self.time.dt) {
            bad("time.dt", format!("must be positive, got {}", self.time.dt));
        }
        if !(self.time.t_end.is_finite() && self.time.t_end >= 0.0) {
            bad("time.t_end", format!("must be nonnegative, got {}", self.time.t_end));
        }
        if !positive(self.time.diag_interval) {
            bad("time.diag_interval", "must be positive".into());
        } else if positive(self.time.dt) && self.time.diag_interval < self.time.dt * (1.0 - 1e-9) {
            bad("time.diag_interval", "must be at least time.dt".into());
        }
        if !self.vortex.alpha.is_finite() {
            bad("vortex.alpha", "must be finite".into());
        }
        if !positive(self.vortex.r_inner) {
            bad("vortex.r_inner", "must be positive".into());
        }
        if !(self.vortex.r_outer.is_finite() && self.vortex.r_outer > self.vortex.r_inner) {
            bad("vortex.r_outer", "must exceed vortex.r_inner".into());
        }
        if !PRESETS.contains(&self.init.preset.as_str()) {
            bad(
                "init.preset",
                format!("unknown preset {:?}; expected one of {}", self.init.preset, PRESETS.join(", ")),
            );
        }
        if self.init.preset == "file" && self.init.file_path.is_none() {
            bad("init.file_path", "required when init.preset = \"file\"".into());
        }
        if !(self.init.amplitude.is_finite() && self.init.amplitude >= 0.0) {
            bad("init.amplitude", "must be nonnegative".into());
        }
        if self.penalization.enabled {
            if !positive(self.penalization.epsilon) {
                bad("penalization.epsilon", "must be positive".into());
            }
            if !positive(self.penalization.obstacle_radius) {
                bad("penalization.obstacle_radius", "must be positive".into());
            }
        }
        if !positive(self.solver.cfl) {
            bad("solver.cfl", "must be positive".into());
        }
        if ForcingRoute::from_name(&self.solver.forcing).is_none() {
            bad(
                "solver.forcing",
                format!("unknown route {:?}; expected heat_defect or curl_remainder", self.solver.forcing),
            );
        }
        if self.output.snapshot_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            bad("output.snapshot_times", "entries must be nonnegative".into());
        }
        if StudyKind::from_name(&self.study.kind).is_none() {
            bad(
                "study.kind",
                format!("unknown study {:?}; expected run, verify-lemmas or decay", self.study.kind),
            );
        }
        if !(self.study.q > 1.0 && self.study.q < 2.0) {
            bad("study.q", format!("must lie in (1, 2), got {}", self.study.q));
        }
        if self.study.random_fields < 50 {
            bad("study.random_fields", "must be at least 50".into());
        }
        if self.study.alphas.iter().any(|a| !a.is_finite()) {
            bad("study.alphas", "entries must be finite".into());
        }
        match self.study.fit_window.as_slice() {
            [] => {}
            [a, b] if a.is_finite() && b.is_finite() && 0.0 < *a && a < b => {}
            _ => bad("study.fit_window", "must be [t_min, t_max] with 0 < t_min < t_max".into()),
        }
        v
    }

    pub fn study_kind(&self) -> StudyKind {
        StudyKind::from_name(&self.study.kind).expect("validated")
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.grid.n, self.grid.half_width).expect("validated")
    }

    pub fn cutoff(&self) -> RadialCutoff {
        RadialCutoff::new(self.vortex.r_inner, self.vortex.r_outer).expect("validated")
    }

    /// Steps between records.
    pub fn diag_steps(&self) -> usize {
        ((self.time.diag_interval / self.time.dt).round() as usize).max(1)
    }

    pub fn fit_window(&self) -> (f64, f64) {
        match self.study.fit_window.as_slice() {
            [a, b] => (*a, *b),
            _ => (10.0, self.time.t_end),
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        if self.study.alphas.is_empty() {
            vec![self.vortex.alpha]
        } else {
            self.study.alphas.clone()
        }
    }

    pub fn solver_config(&self, alpha: f64) -> SolverConfig {
        let grid = self.grid();
        let mut cfg = SolverConfig::new(grid, self.time.dt, self.time.t_end, alpha);
        cfg.cutoff = self.cutoff();
        cfg.dealias = self.solver.dealias;
        cfg.cfl_limit = self.solver.cfl;
        cfg.forcing = ForcingRoute::from_name(&self.solver.forcing).expect("validated");
        if self.penalization.enabled {
            cfg.penalization = Some(Penalization::disk(
                grid,
                self.penalization.obstacle_radius,
                self.penalization.epsilon,
            ));
        }
        cfg
    }

    /// Initial-data preset; relative file paths resolve against `base`.
    pub fn init_preset(&self, base: &Path) -> InitPreset {
        match self.init.preset.as_str() {
            "oseen" => InitPreset::Oseen,
            "quadrupole" => InitPreset::Quadrupole,
            "file" => {
                let p = self.init.file_path.clone().expect("validated");
                InitPreset::File(if p.is_relative() { base.join(p) } else { p })
            }
            _ => InitPreset::Dipole,
        }
    }

    pub fn estimate_config(&self) -> EstimateConfig {
        EstimateConfig {
            cutoff: self.cutoff(),
            n_random_fields: self.study.random_fields,
            seed: self.study.seed,
            ..EstimateConfig::default()
        }
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.vortex.alpha, 0.0);
        assert_eq!(cfg.diag_steps(), 10);
    }

    #[test]
    fn collects_all_violations() {
        let err = ExperimentConfig::from_toml("[time]\ndt = -1.0\n[grid]\nn = 100\n").unwrap_err();
        let ConfigError::Schema(v) = err else { panic!() };
        let fields: Vec<&str> = v.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"time.dt"));
        assert!(fields.contains(&"grid.n"));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ExperimentConfig::from_toml("[grid]\nsize = 3\n").is_err());
        assert!(ExperimentConfig::from_toml("[nope]\n").is_err());
    }

    #[test]
    fn resolved_config_roundtrips() {
        let cfg = ExperimentConfig::from_toml("[vortex]\nalpha = 0.5\n").unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
