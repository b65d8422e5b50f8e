use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the planning, control and simulation layers.
///
/// Numeric payloads are widened to `f64` so the error type stays
/// independent of the scalar parameter.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("start and goal coincide; no frame direction is defined")]
    DegenerateEndpoints,
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("inflation must be non-negative, got {0}")]
    NegativeInflation(f64),
    #[error("region is empty after filtering")]
    EmptyRegion,
    #[error("trajectory length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("abscissa {x} outside trajectory domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("Hermite system is singular: both endpoints at x = {0}")]
    SingularHermite(f64),
    #[error("turn anchors out of order: {0}")]
    AnchorOrder(String),
    #[error("trajectory gap of {gap} at x = {at}")]
    Discontinuity { at: f64, gap: f64 },
    #[error("trajectory does not intersect the region")]
    NoIntersection,
    #[error("no prior turn direction recorded for obstacle {0}")]
    MissingTurnDirection(usize),
    #[error("blocking set is empty")]
    EmptyBlockingSet,
    #[error("no feasible turn parameter up to {max} for obstacle {obstacle}")]
    Infeasible { obstacle: usize, max: f64 },
    #[error("local modification did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error("episode log is empty")]
    EmptyLog,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("no scenario matches {0}")]
    NoScenarios(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
