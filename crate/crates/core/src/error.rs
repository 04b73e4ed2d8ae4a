use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid cut-off: r_inner = {r_inner}, r_outer = {r_outer}")]
    InvalidCutoff { r_inner: f64, r_outer: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("vorticity is not mean-free: cell sum {sum:e} exceeds 1e-8 * L1 norm {l1:e}")]
    MeanNotZero { sum: f64, l1: f64 },

    #[error("CFL violation at t = {t}: number {cfl:.4} exceeds limit {limit}")]
    CflViolation { t: f64, cfl: f64, limit: f64 },

    #[error("non-finite vorticity at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {got} points in window, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("non-positive value {value:e} at t = {t}")]
    NonPositiveValues { t: f64, value: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {error:e}")]
    QuadratureNotConverged { a: f64, b: f64, error: f64 },

    #[error("inequality violated: {0}")]
    InequalityViolated(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
