use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A projection does not belong to its magnitude (range or parity).
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A connected component of the coupling graph mixes conserved projections.
    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),

    /// A reference model was used outside the regime where it is exact.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (dimension {dim}, off-diagonal norm {off_norm:e}, matrix norm {norm:e})")]
    NoConvergence {
        sweeps: usize,
        dim: usize,
        off_norm: f64,
        norm: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidQuantumNumbers(_)
                | Error::Config(_)
                | Error::Precondition(_)
                | Error::SymmetryViolation(_)
                | Error::Contract(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
