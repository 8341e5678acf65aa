use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for {dim} variables")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("operands live on different phase spaces")]
    SpaceMismatch,

    #[error("linear map is singular (|det| = {0:e})")]
    SingularMap(f64),

    #[error("integral does not exist under the Fresnel prescription: {0}")]
    NonIntegrable(String),

    #[error("Gaussian composition is singular for this pair")]
    GaussianCompositionSingular,

    #[error("closed-form star exponential is singular at t = {0}")]
    EvolutionSingular(f64),

    #[error("quadrature oracle did not converge: {0}")]
    OracleNotConverged(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("unsupported wavefunction pair: {0}")]
    UnsupportedPair(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed serialized function: {0}")]
    Format(String),
}
