use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    /// Wavefunction weight reached the truncated lattice edge.
    #[error("boundary contamination: edge weight {weight:.3e} at step {step}")]
    BoundaryContamination { weight: f64, step: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate coin: sin(beta1)·sin(beta2) = 0")]
    DegenerateCoin,
}

impl Error {
    /// True for failures of a numerical guard rather than bad input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::BoundaryContamination { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
