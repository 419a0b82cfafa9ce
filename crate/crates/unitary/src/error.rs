use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field parameters: {0}")]
    InvalidFieldSpec(String),
    #[error("target is not in the subgroup generated by the base")]
    TargetNotInSubgroup,
    #[error("discrete-log range exceeded: subgroup order {0} is above the 2^40 limit")]
    DiscreteLogRangeExceeded(u128),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid letter: {0}")]
    InvalidLetter(String),
    #[error("row-interchange parameter must be a nonzero skew element")]
    ZeroParameter,
    #[error("matrix is not unitary for the split form")]
    NotUnitary,
    #[error("odd dimension requires odd characteristic")]
    UnsupportedParity,
    #[error("dimension {0} is too small; need d >= 4")]
    DimensionTooSmall(usize),
    #[error("invalid diagonal form: {0}")]
    InvalidDiagForm(String),
    #[error("matrix is not special unitary")]
    NotSpecialUnitary,
    #[error("matrix is not a similitude of the split form")]
    NotSimilitude,
    #[error("automorphisms are defined over mismatched generator sets")]
    GeneratorSetMismatch,
    #[error("invalid ciphertext: {0}")]
    InvalidCiphertext(String),
    #[error("oracle responses are not explainable by any conjugation")]
    InconsistentOracle,
    #[error("insufficient data: need at least {0} samples")]
    InsufficientData(usize),
    #[error("malformed serialized value: {0}")]
    Serial(String),
}
