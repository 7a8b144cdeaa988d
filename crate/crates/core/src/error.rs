use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} variables, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("pole at zero: variable x{var} has a negative exponent and vanishes at the point")]
    Pole { var: usize },

    #[error("zero scaling factor for variable x{var}")]
    ZeroFactor { var: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x}, {y}) lies outside the F4 convergence domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("point lies on the singular set: {0}")]
    Singular(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("exponent must be an integer for this construction, got {0}")]
    NonInteger(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("correction field is not closed: {0}")]
    NotClosed(String),

    #[error("no admissible integration path: {0}")]
    NoPath(String),

    #[error("simulation aborted: {0}")]
    Simulation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
