use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension must be in 1..={max}, got {got}")]
    BadDimension { got: usize, max: usize },
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operation requires a {expected}x{expected} matrix, got {got}x{got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("matrix is singular (|det| = {det:e} <= {tol:e})")]
    Singular { det: f64, tol: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("diagonal entry {0} is zero")]
    ZeroDiagonal(usize),
    #[error("row scale {0} is negative")]
    NegativeScale(usize),
    #[error("diagonal entry {0} of the kernel is negative")]
    NegativeDiagonal(usize),
    #[error("no signature gives a uniform off-diagonal sign pattern")]
    NotNormalizable,
    #[error("off-diagonal entries are not all strictly positive or all strictly negative")]
    MixedSigns,
    #[error("pair product Gamma({0},{1}) * Gamma({1},{0}) is negative")]
    NegativePairProduct(usize, usize),
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error("sign constraint violated: {0}")]
    SignConstraint(&'static str),
    #[error("denominator {0} vanishes")]
    ZeroDenominator(&'static str),
    #[error("inputs must be strictly positive")]
    NonPositiveInput,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("matrix is not an M-matrix: {0}")]
    NotMMatrix(String),
    #[error("series degree {got} exceeds the supported maximum {max}")]
    DegreeTooLarge { got: usize, max: usize },
    #[error("kernel has no class-1 witness")]
    NotClass1,
    #[error("beta must be a positive half-integer, got {0}")]
    BadBeta(f64),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
}
