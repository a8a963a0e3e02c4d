use nalgebra::Complex;
use thiserror::Error;

/// Errors produced by the numerical routines and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in input")]
    NonFinite,

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    Asymmetric { asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix size {n} unsupported (limit {limit})")]
    UnsupportedSize { n: usize, limit: usize },

    #[error("eigenvalue {eigenvalue} lies outside the open right half-plane")]
    BranchCut { eigenvalue: Complex<f64> },

    #[error("iteration did not converge (relative residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("path sampled too coarsely: angular jump {jump:.4} at step {step}")]
    Resolution { step: usize, jump: f64 },

    #[error(
        "invalid cover element: lift coordinate off by {offset:.3e} from the canonical lift class"
    )]
    InvalidElement { offset: f64 },

    #[error("quotient lattice has torsion, invariant factors {0:?}")]
    TorsionObstruction(Vec<i64>),

    #[error("integer overflow during exact arithmetic")]
    Overflow,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
