use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("gaussian term {index} is not integrable (u*v - t^2 = {det:e})")]
    NonIntegrableTerm { index: usize, det: f64 },

    #[error("coefficient row {j} has non-positive denominator {value:e}")]
    DegenerateDenominator { j: usize, value: f64 },

    #[error("double-click probability vanishes (p11 = {p11:e})")]
    ZeroClickProbability { p11: f64 },

    #[error("closed form cancels by a factor {factor:e}, beyond double-double precision")]
    IllConditioned { factor: f64 },

    #[error("fock cutoff {dim} too small: {reason}")]
    CutoffTooSmall { dim: usize, reason: String },

    #[error("parity expectation {value} lies outside [-1, 1]")]
    InvalidParity { value: f64 },

    #[error("invalid quadrature distribution: {reason}")]
    InvalidJoint { reason: String },
}

impl Error {
    /// Short stable identifier, used by the CLI for machine-readable failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::NonIntegrableTerm { .. } => "non-integrable-term",
            Error::DegenerateDenominator { .. } => "degenerate-denominator",
            Error::ZeroClickProbability { .. } => "zero-click-probability",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::CutoffTooSmall { .. } => "cutoff-too-small",
            Error::InvalidParity { .. } => "invalid-parity",
            Error::InvalidJoint { .. } => "invalid-joint",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
