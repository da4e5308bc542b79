use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("energies must be strictly increasing (E[{index}] = {lower:e} J >= E[{}] = {upper:e} J)", index + 1)]
    NonMonotoneEnergies { index: usize, lower: f64, upper: f64 },

    #[error("transitions {first} and {second} share the frequency {freq:e} rad/s")]
    DuplicateFrequency { first: usize, second: usize, freq: f64 },

    #[error("dipole moment of transition {transition} must be positive, got {value:e}")]
    NonPositiveDipole { transition: usize, value: f64 },

    #[error("inconsistent lengths: {0}")]
    LengthMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transition index {transition} out of range for a {levels}-level system")]
    TransitionOutOfRange { transition: usize, levels: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("both pivot entries are zero")]
    ZeroPivot,

    #[error("ODE step size underflow at t = {t:e} s (h = {h:e} s)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
