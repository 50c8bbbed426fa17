use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid symmetry class {0}, expected 1 (real symmetric) or 2 (Hermitian)")]
    InvalidSymmetryClass(u8),
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("invalid entry law: {0}")]
    InvalidLaw(String),
    #[error("invalid spike: {0}")]
    InvalidSpike(String),
    #[error("frame kind mismatch: {0}")]
    FrameKindMismatch(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("vector family does not sum to zero (residual {0:e})")]
    NotZeroSum(f64),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("shift {0} is within 1e-8 of the spectrum")]
    NearSingularShift(crate::Complex64),
    #[error("|theta| = {theta} does not exceed sigma = {sigma}")]
    BelowPhaseTransition { theta: f64, sigma: f64 },
    #[error("point {0} lies on the branch cut [-2 sigma, 2 sigma]")]
    OnBranchCut(crate::Complex64),
    #[error("covariance kernel is singular at ({0}, {1})")]
    KernelSingularity(crate::Complex64, crate::Complex64),
    #[error("invalid KS target: {0}")]
    InvalidTarget(String),
    #[error("no super-critical spike to measure")]
    NothingToMeasure,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
