use thiserror::Error;

/// Errors raised by the numerical kernels and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("eigen-solver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("eigenvalue {eigenvalue:.6e} is below the floor {floor:.3e}")]
    Singular { eigenvalue: f64, floor: f64 },

    #[error("cell {cell}: block is indefinite (min eigenvalue {min_eigenvalue:.6e})")]
    IndefiniteCell { cell: usize, min_eigenvalue: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("integration left the positive cone at t = {time} (min eigenvalue {min_eigenvalue:.6e})")]
    Integration { time: f64, min_eigenvalue: f64 },

    #[error("at ε = {epsilon}: {source}")]
    Sweep { epsilon: f64, source: Box<FrsError> },

    #[error("optimizer did not converge after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NotConverged { iterations: usize, grad_norm: f64 },
}

pub type Result<T> = std::result::Result<T, FrsError>;
