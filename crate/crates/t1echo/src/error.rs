//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coupling strength v_perp must be positive and finite, got {0}")]
    InvalidCoupling(f64),
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("clamp factor must be >= 1 and finite, got {0}")]
    InvalidClampFactor(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("state norm must be 1 within {tol:e}, got {norm}")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix contains non-finite entries")]
    NonFiniteMatrix,
    #[error("density matrix violates {what} (deviation {value:e})")]
    InvalidDensityMatrix { what: &'static str, value: f64 },
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("segment duration must be non-negative and finite, got {0}")]
    InvalidDuration(f64),
    #[error("sample step must be positive and finite, got {0}")]
    InvalidSampleStep(f64),
    #[error("state leaks outside the one-excitation subspace (amplitude {0:e})")]
    SubspaceLeakage(f64),
    #[error("time grid must be non-empty, ascending and non-negative")]
    MalformedGrid,
    #[error("ODE step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("ODE tolerances must be positive and finite")]
    InvalidTolerance,
    #[error("eigensolver failed to converge")]
    EigenNoConvergence,
    #[error("chi matrix violates {what} (deviation {value:e})")]
    InvalidChiMatrix { what: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
