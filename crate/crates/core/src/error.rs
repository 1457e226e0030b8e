use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside the accepted domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The filters do not overlap the frequency grid.
    #[error("filter passband has no overlap with the frequency grid")]
    NoFilterOverlap,

    #[error("symmetrized amplitude vanishes everywhere (antisymmetric input)")]
    DegenerateSymmetrization,

    #[error("unknown mode {0}")]
    UnknownMode(String),

    #[error("integral has imaginary residue {residue:.3e} (limit {limit:.1e})")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    #[error("oracle grid of {0} points exceeds the cost guard of 64")]
    OracleTooLarge(usize),

    #[error("at delta_x2 = {delta_x2:e} m: {source}")]
    AtScanPoint {
        delta_x2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("fit did not converge after {iterations} iterations: {diagnostics}")]
    FitNonConvergence {
        iterations: usize,
        diagnostics: String,
    },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("malformed interferogram data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::ImaginaryResidue { .. }
            | Error::ProbabilityOutOfRange { .. }
            | Error::FitNonConvergence { .. }
            | Error::DegenerateSymmetrization => true,
            Error::AtScanPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
