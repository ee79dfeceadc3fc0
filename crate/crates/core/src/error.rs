use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular kernel evaluated at the origin")]
    SingularAtOrigin,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "point ({x}, {y}) is not on the obstacle boundary (distance {distance:.3e} > {tol:.3e})"
    )]
    NotOnBoundary {
        x: f64,
        y: f64,
        distance: f64,
        tol: f64,
    },

    #[error("point ({x}, {y}) lies inside the obstacle")]
    PointInsideObstacle { x: f64, y: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("obstacle does not fit inside the computational box")]
    ObstacleOutsideGrid,

    #[error("unsupported kernel for this operation: {0}")]
    UnsupportedKernel(String),

    #[error("transform plan does not match the field's grid or kernel")]
    PlanMismatch,

    #[error("time step {dt} exceeds the stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("non-finite value at cell {cell} after step")]
    NonFinite { cell: usize },

    #[error("invariant region violated at cell {cell}: value {value}")]
    InvariantViolated { cell: usize, value: f64 },

    #[error("negative interaction weight {weight:e} at radius {radius}")]
    NegativeWeight { radius: f64, weight: f64 },

    #[error("solver failed to converge: {0}")]
    NoConvergence(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error at line {line}: [{section}] {key}: {message}")]
    Config {
        line: usize,
        section: String,
        key: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
