use thiserror::Error;

/// Errors raised anywhere in the reduction / factorization / kernel pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `RL` vanished or lost order, so the reduced problem cannot stand in for the DER.
    #[error("degenerate reduction: {0}")]
    DegenerateReduction(String),

    #[error("root finder did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("no real factorization: {0}")]
    NoRealFactorization(String),

    /// The homogeneous boundary value problem has nontrivial solutions.
    #[error("boundary value problem is not uniquely solvable: {0}")]
    NonUniqueBVP(String),

    #[error("boundary conditions do not decompose: {0}")]
    NotDecomposable(String),

    #[error("factor q is complex and the complex-factor route is disabled")]
    ComplexFactorizationSkipped,

    #[error("point ({t}, {s}) lies outside the kernel square")]
    OutOfDomain { t: f64, s: f64 },

    #[error("kernel structure: {0}")]
    KernelStructure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}, column {column}: expected {expected}")]
    Parse {
        line: usize,
        column: usize,
        expected: String,
    },

    #[error("dimension error at line {line}: {message}")]
    Dimension { line: usize, message: String },

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
