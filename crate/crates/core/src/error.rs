use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian (‖M − M†‖_F = {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("trace bound violated: largest eigenvalue of the induced effect is {0:.6e} > 1")]
    TraceBoundViolated(f64),
    #[error("invalid operation: {0}")]
    InvalidOperation(String),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("invalid density state: {0}")]
    InvalidState(String),
    #[error("instrument is not normalized (‖d·tr₁Ω − I‖ = {0:.3e})")]
    NotNormalized(f64),
    #[error("matrix is not unitary (‖U†U − I‖_F = {0:.3e})")]
    NotUnitary(f64),
    #[error("value {0} outside the allowed range")]
    OutOfRange(f64),
    #[error("operation is not pure (Kraus rank {0})")]
    NotPure(usize),
    #[error("malformed feasibility problem: {0}")]
    MalformedSpec(String),
    #[error("point violates the feasibility constraints by {0:.3e}")]
    InfeasiblePoint(f64),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("no closed-form criterion applies to this pair")]
    NoClosedForm,
}
