use thiserror::Error;

/// Errors raised by the numerical kernels and the theorem checkers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigen-iteration did not converge within {sweeps} sweeps")]
    IterationLimit { sweeps: usize },

    #[error("function undefined at eigenvalue {value}")]
    DomainError { value: f64 },

    #[error("eigenvalue {eigenvalue} lies within {tol:e} of the split point {gamma}")]
    GapTooClose { gamma: f64, eigenvalue: f64, tol: f64 },

    #[error("point {point} lies inside the spectrum (eigenvalue {eigenvalue})")]
    InsideSpectrum { point: f64, eigenvalue: f64 },

    #[error("columns are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("no graph representation: ||P+ - Q+|| = {dist} is not below 1 - {tol:e}")]
    GraphUndefined { dist: f64, tol: f64 },

    #[error("P+Q+ restricted to Ran P+ is not bijective (smallest singular value {sigma_min:e})")]
    NotBijective { sigma_min: f64 },

    #[error("projected span has numerical rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix size {size} exceeds the dense budget {cap}")]
    BudgetExceeded { size: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
