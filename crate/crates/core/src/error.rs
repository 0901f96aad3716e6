use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("inadmissible initial data: {0}")]
    InadmissibleData(String),

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at node {index} ({what})")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid stepper configuration: {0}")]
    InvalidStepper(String),

    #[error("instability at t = {t}: max|w| grew by a factor {growth:.3e} in one step")]
    Unstable { t: f64, growth: f64 },

    #[error(
        "signal reaches the outer boundary: support radius {support:.4} + |T| {horizon:.4} > r_max {r_max:.4}"
    )]
    BoundaryReach {
        support: f64,
        horizon: f64,
        r_max: f64,
    },

    #[error("snapshot at t = {t} is contaminated by the outer boundary (edge amplitude {edge:.3e})")]
    BoundaryContaminated { t: f64, edge: f64 },

    #[error("no exterior signal: all tracked exterior accumulators are zero")]
    NoExteriorSignal,

    #[error("observer failed: {0}")]
    Observer(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
