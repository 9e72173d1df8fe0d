use thiserror::Error;

/// Every failure the numerical layers can report.
///
/// Variant names double as the machine-readable error kind printed by the
/// command-line front end, so keep them stable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("QR iteration did not converge after {iterations} sweeps (dimension {dim})")]
    NonConvergence { iterations: usize, dim: usize },

    #[error("left/right eigenvector overlap {overlap:.3e} at eigenvalue {index} is too small; spectrum is (nearly) defective")]
    DefectivePairing { index: usize, overlap: f64 },

    #[error("no adjoint eigenvalue within {distance:.3e} of eigenvalue {index}")]
    PairingMismatch { index: usize, distance: f64 },

    #[error("matrix is singular to working precision (pivot {pivot:.3e})")]
    SingularMatrix { pivot: f64 },

    #[error("adaptive step collapsed to {step:.3e} at t = {time}")]
    StepUnderflow { time: f64, step: f64 },

    #[error("Bloch form is only defined without on-site potentials")]
    UnsupportedOnsite,

    #[error("band gap closes on the k-grid (min |E| = {min_abs_e:.3e}); winding undefined")]
    GapClosure { min_abs_e: f64 },

    #[error("winding sum {raw:.6} (in units of 2pi) is not quantized; refine the k-grid")]
    NonQuantized { raw: f64 },

    #[error("no localized edge pair: best one-sided weights {left_weight:.3} / {right_weight:.3}")]
    NoEdgePair { left_weight: f64, right_weight: f64 },

    #[error("coupling ratio is degenerate (t_A = 0 or t_B = 0)")]
    DegenerateCoupling,

    #[error("parameters are not in the topological phase")]
    NotTopological,

    #[error("middle block M is singular (pivot {pivot:.3e})")]
    SingularMiddleBlock { pivot: f64 },
}

impl Error {
    /// Short, stable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::DefectivePairing { .. } => "DefectivePairing",
            Error::PairingMismatch { .. } => "PairingMismatch",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::UnsupportedOnsite => "UnsupportedOnsite",
            Error::GapClosure { .. } => "GapClosure",
            Error::NonQuantized { .. } => "NonQuantized",
            Error::NoEdgePair { .. } => "NoEdgePair",
            Error::DegenerateCoupling => "DegenerateCoupling",
            Error::NotTopological => "NotTopological",
            Error::SingularMiddleBlock { .. } => "SingularMiddleBlock",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
