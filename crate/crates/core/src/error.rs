use thiserror::Error;

pub type Result<T> = std::result::Result<T, DeadcoreError>;

#[derive(Debug, Error)]
pub enum DeadcoreError {
    /// An evaluation point or truncation radius lies outside the admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    /// A scalar parameter (p, mu, h, ...) is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The requested object does not exist in the given regime.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    NumericalFailure { message: String, residual: f64 },

    #[error("certificate unrepresentable: exp iterate overflows at R for N={requested}; largest representable N is {largest}")]
    CertificateUnrepresentable { requested: u32, largest: u32 },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("incompatible profiles: {0}")]
    Incompatible(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DeadcoreError {
    pub(crate) fn numerical(message: impl Into<String>, residual: f64) -> Self {
        DeadcoreError::NumericalFailure {
            message: message.into(),
            residual,
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DeadcoreError::NumericalFailure { .. }
                | DeadcoreError::NoBracket(_)
                | DeadcoreError::DegenerateProfile(_)
                | DeadcoreError::InsufficientData(_)
        )
    }
}
