use thiserror::Error;

/// Failure modes shared across the crate. Constructors and operations
/// validate their preconditions and report the first violation; nothing
/// here is recoverable by retrying with the same inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A window cannot hold the requested structure (defect set with its
    /// margin, evolution support, detection windows, ...).
    #[error("window [{lo}, {hi}] too small: {reason}")]
    WindowTooSmall { lo: i64, hi: i64, reason: String },

    /// State/field/operator windows are incompatible for the operation.
    #[error("window mismatch: {reason}")]
    WindowMismatch { reason: String },

    /// The generated perturbed coin left the exponential envelope; the
    /// generator scales offsets to stay inside, so this flags a parameter
    /// combination (p near 0 or 1, floor above p) the scaling cannot absorb.
    #[error(
        "perturbation envelope violated at site {site}: \
         deviation {deviation:.3e} exceeds bound {bound:.3e}"
    )]
    EnvelopeViolation {
        site: i64,
        deviation: f64,
        bound: f64,
    },

    /// The operation is undefined at this parameter point (p = 0 collapses
    /// the band structure to two points, so band/level-set/detection ops
    /// refuse it).
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    /// The dense eigensolver failed or its output missed the residual
    /// target on re-verification.
    #[error("eigensolver convergence failure: {0}")]
    ConvergenceFailure(String),

    /// Every superposition coefficient is zero; there is no state to build.
    #[error("all superposition coefficients are zero")]
    AllZeroCoefficients,
}

pub type Result<T> = std::result::Result<T, Error>;
