//! Error type shared by every module of the core crate.

use core::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// Grid parameters violate their invariants.
    InvalidGrid(&'static str),
    /// Bubble configuration violates its invariants.
    InvalidConfig(&'static str),
    /// A parameter state is outside its domain (sign or size constraints).
    InvalidState(&'static str),
    /// Constrained solve left a residual above tolerance.
    SingularSystem { residual: f64, rhs_norm: f64 },
    /// The profile `P` did not reach its left plateau on the given domain.
    DomainTooSmall { plateau_error: f64 },
    /// Eigenvalue or eigenvector iteration failed.
    ConvergenceFailure(&'static str),
    /// The exponent ladder collapsed.
    DegenerateLadder { delta0: f64 },
    /// Two bubbles are too close for the tail model.
    BubbleCollision { k: usize, j: usize, distance: f64 },
    /// The sampling grid does not contain every bubble core.
    GridTooNarrow { needed_min: f64, needed_max: f64 },
    /// Too many profile lookups fell outside the tabulated range.
    ProfileDomainExceeded { fraction: f64 },
    /// Initial energy correction exceeds its admissible band.
    InitOutOfBand { k: usize, a: f64, bound: f64 },
    /// Adaptive integrator step underflow.
    StepFailure { s: f64, step: f64 },
    /// Shooting did not find a surviving trajectory.
    NoConvergence { iterations: usize, best_exit: f64, best: alloc::vec::Vec<f64> },
    /// Sup norm grew past the blow-up guard.
    BlowupDetected { t: f64, sup: f64 },
    /// Time step exceeds the stability estimate.
    CflViolation { dt: f64, limit: f64 },
    /// Time sampling too coarse for a centered derivative.
    TrajectoryTooSparse { rel_step: f64 },
    /// Fewer separated peaks than requested.
    BubbleCountMismatch { expected: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(m) => write!(f, "invalid grid: {m}"),
            Error::InvalidConfig(m) => write!(f, "invalid bubble config: {m}"),
            Error::InvalidState(m) => write!(f, "invalid parameter state: {m}"),
            Error::SingularSystem { residual, rhs_norm } => write!(
                f,
                "SingularSystem: constrained residual {residual:e} vs rhs norm {rhs_norm:e}"
            ),
            Error::DomainTooSmall { plateau_error } => write!(
                f,
                "DomainTooSmall: P misses its left plateau by {plateau_error:e}"
            ),
            Error::ConvergenceFailure(m) => write!(f, "ConvergenceFailure: {m}"),
            Error::DegenerateLadder { delta0 } => {
                write!(f, "DegenerateLadder: delta0 = {delta0} does not exceed 1/43")
            }
            Error::BubbleCollision { k, j, distance } => write!(
                f,
                "BubbleCollision: bubble {k} sits {distance:e} from the tail center of bubble {j}"
            ),
            Error::GridTooNarrow { needed_min, needed_max } => write!(
                f,
                "GridTooNarrow: grid must cover [{needed_min}, {needed_max}]"
            ),
            Error::ProfileDomainExceeded { fraction } => write!(
                f,
                "ProfileDomainExceeded: {:.3}% of nodes used extrapolated profiles",
                100.0 * fraction
            ),
            Error::InitOutOfBand { k, a, bound } => write!(
                f,
                "InitOutOfBand: |a_{k}| = {:e} exceeds {bound:e}",
                a.abs()
            ),
            Error::StepFailure { s, step } => {
                write!(f, "StepFailure: step {step:e} underflowed at s = {s}")
            }
            Error::NoConvergence { iterations, best_exit, .. } => write!(
                f,
                "NoConvergence: {iterations} iterations, best candidate exits at s = {best_exit}"
            ),
            Error::BlowupDetected { t, sup } => {
                write!(f, "BlowupDetected: sup norm {sup:e} at t = {t}")
            }
            Error::CflViolation { dt, limit } => {
                write!(f, "CFLViolation: dt = {dt:e} above stability limit {limit:e}")
            }
            Error::TrajectoryTooSparse { rel_step } => write!(
                f,
                "TrajectoryTooSparse: relative s-step {rel_step:e} above 1e-3"
            ),
            Error::BubbleCountMismatch { expected, found } => write!(
                f,
                "BubbleCountMismatch: expected {expected} separated peaks, found {found}"
            ),
        }
    }
}

impl core::error::Error for Error {}
