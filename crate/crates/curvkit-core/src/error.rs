//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by curvature analysis, synthesis and approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A curvature that must be strictly positive is zero or negative.
    NonPositiveCurvature {
        /// 0-based curvature index.
        index: usize,
        /// Offending value.
        value: f64,
        /// Parameter at which the violation was detected, when known.
        t: Option<f64>,
    },
    /// An expected-nonzero frequency of the Frenet coefficient matrix fell
    /// below tolerance (last curvature vanishes in even ambient dimension).
    DegenerateSpectrum { detail: String },
    /// Derivative vectors failed the Frenet independence condition.
    DegenerateFrame {
        /// Parameter at which the frame degenerates, when known.
        t: Option<f64>,
        detail: String,
    },
    /// A periodic grid is too coarse for the requested operation.
    InsufficientResolution { required: usize, actual: usize },
    /// A mollifier window does not fit inside the region it may modify.
    WidthTooLarge { width: f64, limit: f64 },
    /// A sampled circle map is not an orientation-preserving diffeomorphism.
    NotADiffeomorphism { t: f64, derivative: f64 },
    /// Bridge endpoints are farther apart than the admissible gap.
    GapTooLarge { gap: f64, admissible: f64 },
    /// A construction stage missed its error budget after retries.
    BudgetExceeded { stage: &'static str, detail: String },
    /// No quasi-periodic return was found within the search horizon.
    NotFound { horizon: f64, best_gap: f64 },
    /// The operation does not apply to the given input (e.g. planar curves
    /// in the embedding post-pass).
    NotApplicable { detail: String },
    /// A randomized repair loop exhausted its draw budget.
    RetriesExhausted { draws: usize },
    /// Malformed input that violates a documented precondition.
    InvalidInput { detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositiveCurvature { index, value, t } => match t {
                Some(t) => write!(
                    f,
                    "curvature {} must be strictly positive, got {value:.6e} at t = {t:.6}",
                    index + 1
                ),
                None => write!(
                    f,
                    "curvature {} must be strictly positive, got {value:.6e}",
                    index + 1
                ),
            },
            Error::DegenerateSpectrum { detail } => {
                write!(f, "degenerate Frenet spectrum: {detail}")
            }
            Error::DegenerateFrame { t, detail } => match t {
                Some(t) => write!(f, "degenerate Frenet frame at t = {t:.6}: {detail}"),
                None => write!(f, "degenerate Frenet frame: {detail}"),
            },
            Error::InsufficientResolution { required, actual } => write!(
                f,
                "insufficient resolution: need at least {required} samples, got {actual}"
            ),
            Error::WidthTooLarge { width, limit } => write!(
                f,
                "mollifier window {width:.6e} exceeds protected region {limit:.6e}"
            ),
            Error::NotADiffeomorphism { t, derivative } => write!(
                f,
                "circle map is not a diffeomorphism: derivative {derivative:.3e} at t = {t:.6}"
            ),
            Error::GapTooLarge { gap, admissible } => write!(
                f,
                "endpoint gap {gap:.6e} exceeds admissible gap {admissible:.6e}"
            ),
            Error::BudgetExceeded { stage, detail } => {
                write!(f, "stage `{stage}` exceeded its error budget: {detail}")
            }
            Error::NotFound { horizon, best_gap } => write!(
                f,
                "no return found within horizon {horizon:.3} (best gap {best_gap:.3e})"
            ),
            Error::NotApplicable { detail } => write!(f, "not applicable: {detail}"),
            Error::RetriesExhausted { draws } => {
                write!(f, "embedding repair exhausted {draws} perturbation draws")
            }
            Error::InvalidInput { detail } => write!(f, "invalid input: {detail}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn invalid(detail: impl Into<String>) -> Self {
        Error::InvalidInput {
            detail: detail.into(),
        }
    }
}
