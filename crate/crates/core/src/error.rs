use thiserror::Error;

/// Every failure the library can report.
///
/// Variant names double as the machine-readable error kind emitted by the CLI,
/// see [`Error::kind`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sweep profile: {0}")]
    InvalidProfile(String),

    #[error("sweep profile does not close the loop: integral of rate is {integral}, expected pi")]
    ClosureViolation { integral: f64 },

    #[error("invalid quadrature configuration: {0}")]
    InvalidQuadrature(String),

    #[error("quadrature did not converge after {panels} panels (last change {delta:e})")]
    QuadratureNonConvergence { panels: usize, delta: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid motional state: {0}")]
    InvalidState(String),

    #[error("truncation leakage {leakage:e} exceeds {limit:e}")]
    TruncationLeak { leakage: f64, limit: f64 },

    #[error("quantum Fisher information matrix is singular (det {det:e}, scale {scale:e})")]
    SingularQfim { det: f64, scale: f64 },

    #[error("Fock gap 2*Omega0*mu^2/kappa = {gap} is not a non-negative integer")]
    NonIntegerGap { gap: f64 },

    #[error("Fock levels n1={n_up}, n2={n_down} do not realise the required gap {gap}")]
    GapMismatch { n_up: u64, n_down: u64, gap: f64 },

    #[error("omega0 = 2*kappa*Omega0 sits on the coherent-state branch boundary")]
    BranchBoundary,

    #[error("no real x2 satisfies B = 0 (discriminant {discriminant:e})")]
    NegativeDiscriminant { discriminant: f64 },

    #[error("energy budget {budget} is below the floor {floor}")]
    InsufficientEnergy { budget: f64, floor: f64 },

    #[error("{what} did not converge: {detail}")]
    StepNonConvergence { what: &'static str, detail: String },
}

impl Error {
    /// Stable identifier of the variant, used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidProfile(_) => "InvalidProfile",
            Error::ClosureViolation { .. } => "ClosureViolation",
            Error::InvalidQuadrature(_) => "InvalidQuadrature",
            Error::QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidState(_) => "InvalidState",
            Error::TruncationLeak { .. } => "TruncationLeak",
            Error::SingularQfim { .. } => "SingularQfim",
            Error::NonIntegerGap { .. } => "NonIntegerGap",
            Error::GapMismatch { .. } => "GapMismatch",
            Error::BranchBoundary => "BranchBoundary",
            Error::NegativeDiscriminant { .. } => "NegativeDiscriminant",
            Error::InsufficientEnergy { .. } => "InsufficientEnergy",
            Error::StepNonConvergence { .. } => "StepNonConvergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {value}")))
    }
}
