use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("period t={t} outside the admissible range for horizon {horizon}")]
    PeriodOutOfRange { t: usize, horizon: usize },

    #[error("degenerate iteration family: C*A = {ca} (geometric sum is singular at 1)")]
    DegenerateFamily { ca: f64 },

    #[error("infeasible policy parameters: {0}")]
    InfeasiblePolicy(String),

    #[error("quadrature did not converge at t={t}, x={x}: {detail}")]
    Quadrature { t: usize, x: f64, detail: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("series validation failed: {0}")]
    Validation(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("training diverged at episode {episode}: {detail}")]
    Diverged { episode: usize, detail: String },

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("{cell}: {source}")]
    InCell { cell: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::PeriodOutOfRange { .. } => "period_out_of_range",
            Error::DegenerateFamily { .. } => "degenerate_family",
            Error::InfeasiblePolicy(_) => "infeasible_policy",
            Error::Quadrature { .. } => "quadrature",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Contract(_) => "contract",
            Error::Diverged { .. } => "diverged",
            Error::Undefined(_) => "undefined",
            Error::InCell { source, .. } => source.kind(),
            Error::Io(_) => "io",
        }
    }
}
