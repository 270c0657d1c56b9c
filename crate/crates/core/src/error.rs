use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e}, scale {scale:e})")]
    NotHermitian { deviation: f64, scale: f64 },

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("not a density operator: {0}")]
    InvalidDensity(String),

    #[error("function undefined on spectrum: {0}")]
    Domain(String),

    #[error("degenerate variance {variance:e}: state is an eigenstate of the observable")]
    DegenerateVariance { variance: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
