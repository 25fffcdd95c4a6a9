use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {0} is odd")]
    OddDimension(usize),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("symplecticity residual exceeded: {residual:e} > {tol:e}")]
    NotSymplectic { residual: f64, tol: f64 },
    #[error("frame matrix is numerically singular (condition number {condition:e})")]
    SingularFrame { condition: f64 },
    #[error("expected two eigenvalues within {tol:e} of 1, found {found}")]
    TrivialPairNotFound { found: usize, tol: f64 },
    #[error("no eigenvalue of the A-block lies within {tol:e} of 1")]
    TrivialEigenvalueNotFound { tol: f64 },
    #[error("multipliers do not form reciprocal pairs")]
    NotReciprocalPairs,
    #[error("non-finite input")]
    NonFinite,
    #[error("eigenvalue {re}{im:+}i is neither on the unit circle nor real")]
    InvalidEigenvalue { re: f64, im: f64 },
    #[error("characteristic polynomial is not palindromic (|c1 - c3| = {0:e})")]
    NotPalindromic(f64),
    #[error("A-block eigenvalues are not real and distinct")]
    NotRealDistinct,
    #[error("B-sign of eigenvalue {index} is indeterminate (|v^T B v| = {value:e})")]
    IndeterminateSign { index: usize, value: f64 },
    #[error("elliptic multiplier {re}{im:+}i is not simple")]
    DegenerateEllipticPair { re: f64, im: f64 },
    #[error("orbit type is degenerate")]
    DegenerateType,
    #[error("ledger entry {0} is degenerate")]
    DegenerateEntry(usize),
    #[error("C-block is singular (degenerate orbit)")]
    SingularC,
    #[error("U_{{k-1}}(A) is singular at iterate k = {k}")]
    SingularU { k: u32 },
    #[error("iterate {k} is degenerate (quadratic form has a zero eigenvalue)")]
    DegenerateIterate { k: u32 },
    #[error("{0} is not a multiple of 1/2")]
    InvalidHalfInteger(f64),
    #[error("trajectory within {distance:e} of a primary")]
    CollisionSingularity { distance: f64 },
    #[error("integration failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("corrector did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("seed is {deviation:e} away from the fixed locus")]
    LeftFixedLocus { deviation: f64 },
    #[error("continuation step fell below the floor near jacobi {jacobi}")]
    StepFloorReached { jacobi: f64 },
    #[error("B-signature undefined at symmetric point {point}")]
    SignUndefined { point: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures (as opposed to malformed or invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::CollisionSingularity { .. }
                | Error::StepFailure { .. }
                | Error::NoConvergence { .. }
                | Error::StepFloorReached { .. }
                | Error::TrivialPairNotFound { .. }
                | Error::TrivialEigenvalueNotFound { .. }
                | Error::SingularC
                | Error::SingularU { .. }
                | Error::DegenerateIterate { .. }
                | Error::DegenerateEllipticPair { .. }
                | Error::IndeterminateSign { .. }
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
