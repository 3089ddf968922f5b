use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operand radius {radius} exceeds transform capacity {capacity}")]
    GridOverflow { radius: usize, capacity: usize },

    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("Gram matrix not positive semidefinite for |k|^2 = {norm_sq} (pivot {pivot:e})")]
    CholeskyFailure { norm_sq: i64, pivot: f64 },

    #[error("driver bank is at t = {bank}, requested t = {requested}")]
    TimeMismatch { bank: f64, requested: f64 },

    #[error("cannot move a driver bank backwards from t = {bank} to t = {requested}")]
    BackwardsInTime { bank: f64, requested: f64 },

    #[error("requested time {requested} is not on the noise grid of resolution {resolution}")]
    OffNoiseGrid { requested: f64, resolution: f64 },

    #[error("{what} needs at least {needed} samples, got {got}")]
    InsufficientSamples { what: &'static str, needed: usize, got: usize },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("time grid is not uniform")]
    NonUniformGrid,

    #[error("quadrature did not converge: {coarse:e} vs {fine:e}")]
    QuadratureNotConverged { coarse: f64, fine: f64 },

    #[error("zero mode is not allowed here")]
    ZeroMode,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
