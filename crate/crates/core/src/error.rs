use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |M - M†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("expectation value has imaginary part {imag:e}; operator is not Hermitian")]
    ComplexExpectation { imag: f64 },

    /// A point lies inside a guard band around the z-axis or the origin.
    #[error("singular region: {0}")]
    Singularity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Neighbouring eigenvectors became (nearly) orthogonal along a loop.
    #[error("degenerate overlap |<u_k|u_k+1>| = {magnitude:e} at sample {index}")]
    Degeneracy { index: usize, magnitude: f64 },

    #[error("time step too large: dt*|H| = {value:.4} exceeds {limit}")]
    StepSize { value: f64, limit: f64 },

    #[error("pointer grid does not resolve the state: {0}")]
    GridResolution(String),
}

impl Error {
    /// True for errors raised by the numerical guard bands rather than by
    /// malformed input.
    pub fn is_guard_violation(&self) -> bool {
        matches!(
            self,
            Error::Singularity(_) | Error::Degeneracy { .. } | Error::StepSize { .. } | Error::GridResolution(_)
        )
    }
}
