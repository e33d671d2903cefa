use thiserror::Error;

/// Errors produced by the GTS library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GtsError {
    #[error("pole of {function} at x = {x}")]
    Pole { function: &'static str, x: f64 },

    #[error("parameter `{field}` = {value} violates bound: {bound}")]
    Domain {
        field: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("complex power argument {re} + {im}i is on or past the branch cut")]
    BranchCut { re: f64, im: f64 },

    #[error("matrix is singular (pivot {pivot:e} below threshold {threshold:e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("Jacobi eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("density table too coarse: total mass {mass} misses 1 by more than 1e-4")]
    GridTooCoarse { mass: f64 },

    #[error("x = {x} lies outside the table span [{lo}, {hi}]")]
    OutOfSpan { x: f64, lo: f64, hi: f64 },

    #[error("level {alpha} requires a bracket closer than two nodes to the table edge")]
    BracketAtEdge { alpha: f64 },

    #[error("quartic has no sign change on [0, 1]")]
    NoBracket,

    #[error("contour integrand does not decay: {0}")]
    DivergentContour(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("coefficient of variation undefined for zero mean")]
    CvUndefined,

    #[error("non-finite log-likelihood at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl From<std::io::Error> for GtsError {
    fn from(e: std::io::Error) -> Self {
        GtsError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GtsError>;
