use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite coefficient encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("interpolant length scale h = {h} is below grid resolution (need h >= {min})")]
    HTooSmall { h: f64, min: f64 },

    #[error("trajectory span {span} is shorter than the required {required}")]
    SpanTooShort { span: f64, required: f64 },

    #[error("determining-map tail did not settle: stationarity defect {defect:.3e} > tolerance {tolerance:.3e}")]
    TailNotConverged { defect: f64, tolerance: f64 },

    #[error("beta still changing at end of evolution: |dbeta/ds| = {rate:.3e}")]
    NoConvergence { rate: f64 },

    #[error("trajectory is not a steady state of the determining form: defect {defect:.3e} > {tolerance:.3e}")]
    NotSteady { defect: f64, tolerance: f64 },

    #[error("h = {h} must be smaller than L = {length}")]
    HNotLessThanL { h: f64, length: f64 },

    #[error("trajectories coincide; Lipschitz ratio undefined")]
    DivisionByZero,

    #[error("no admissible (mu, h): {binding} cannot be met ({reason})")]
    Infeasible { binding: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
