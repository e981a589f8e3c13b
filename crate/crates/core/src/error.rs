use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the configured cap {cap}")]
    DimensionLimit { requested: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("{op} failed to converge (residual {residual:.3e})")]
    Numeric { op: &'static str, residual: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("truncation is degenerate: retained weight {weight:.3e}")]
    TruncationDegenerate { weight: f64 },

    #[error("local filter annihilates the state (norm {norm:.3e})")]
    FilterDegenerate { norm: f64 },

    #[error("witness is degenerate: epsilon {epsilon:.3e} is below the certification floor")]
    WitnessDegenerate { epsilon: f64 },

    #[error("reference state is rank deficient: Schmidt rank {rank} < {required}")]
    ReferenceState { rank: usize, required: usize },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric { .. })
    }
}
