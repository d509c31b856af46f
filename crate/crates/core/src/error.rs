use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("boundary mass {mass:.3e} exceeds tolerance {tolerance:.3e}; spatial window too small")]
    BoundaryMass { mass: f64, tolerance: f64 },

    #[error("k-grid cannot resolve the propagator phase: 2·dk·k_max·t = {phase_step:.3} rad (limit 0.5)")]
    OscillationResolution { phase_step: f64 },

    #[error("trace of the singular part requested at s = 0")]
    SingularTrace,

    #[error("diagonal degeneracy at time node {node} (|pivot| = {pivot:.3e}); refine the time grid")]
    DiagonalDegeneracy { node: usize, pivot: f64 },

    #[error("time grid too short: {0}")]
    GridTooShort(String),

    #[error("time {0} is not a node of the time grid")]
    NotAGridNode(f64),

    #[error("energy trace requires a constant gamma profile")]
    NonConstantGamma,

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("scenario invalid: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
