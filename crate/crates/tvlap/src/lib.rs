//! Online state estimation for scalar time series.
//!
//! A time series `x(n) = f(n) + noise(n)` is modeled by embedding the trend
//! `f` and its first `K` derivatives in a state vector that evolves under a
//! Taylor-series transition matrix. Running a Kalman filter over the
//! observations then recovers, per sample and in one pass:
//!
//! * the instantaneous trend `f(n)` (state entry 0),
//! * its derivatives `f'(n) .. f^(K)(n)` (entries 1..K),
//! * extrema of the trend, detected online from the estimated first and
//!   second derivatives.
//!
//! The crate is organized bottom-up:
//!
//! * [`matrix`] — dense matrix kernel sized for the small systems here,
//! * [`model`] — transition/measurement/noise-driver construction, the
//!   named special cases (local level, Holt, CV, CA), and the ARMA
//!   companion-form augmentation for colored measurement noise,
//! * [`noise`] — measurement-variance estimation from historical blocks,
//!   ARMA impulse responses, and innovation-variance scaling,
//! * [`filter`] — the Kalman recursion (Joseph-form update), multi-step
//!   forecasting, the correlated-noise variant, and the covariance
//!   Riccati recursion,
//! * [`verify`] — observability/controllability rank checks,
//! * [`analysis`] — online trend tracking, extrema detection/forecasting,
//!   and derivative-variance fault diagnosis,
//! * [`simgen`] — seeded, bit-reproducible scenario generators.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded targets. All transcendental math goes through
//! [`libm`] so results are bit-identical across platforms and feature sets.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod filter;
pub mod matrix;
pub mod model;
pub mod noise;
pub mod simgen;
pub mod verify;

use core::fmt;

pub use matrix::Matrix;
pub use model::{ArmaSpec, AugmentedModel, GVariant, StateSpaceModel, TvlapConfig};

/// Errors reported by the estimation toolkit.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes are incompatible for the named operation.
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// A square matrix was required.
    NotSquare { rows: usize, cols: usize },
    /// A value or matrix entry was NaN or infinite.
    NonFinite { what: &'static str },
    /// Matrix failed the symmetry tolerance of a symmetric solve.
    NotSymmetric { max_asymmetry: f64 },
    /// Factorization hit a non-positive pivot; the matrix is not positive
    /// definite.
    NotPositiveDefinite { pivot: f64, index: usize },
    /// A scalar or structural precondition failed.
    InvalidArgument { what: &'static str },
    /// Process-noise covariance has the wrong dimension for the chosen
    /// noise-driver variant.
    QDimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    /// Autoregressive polynomial has a root on or outside the unit circle.
    UnstableAr,
    /// Historical block is too short for the requested fit order.
    BlockTooShort { needed: usize, got: usize },
    /// Impulse response has zero energy (all moving-average coefficients
    /// are zero), so the innovation variance is undefined.
    ZeroImpulseEnergy,
    /// Innovation variance came out non-positive; the model is
    /// misconfigured.
    NonPositiveInnovationVariance { value: f64 },
    /// Extrema detection needs a second-derivative state, i.e. order >= 2.
    ExtremaNeedsOrderTwo { k: usize },
    /// Diagnosis channels must all have the same length.
    ChannelLengthMismatch { first: usize, other: usize },
    /// Diagnosis needs at least two channels.
    TooFewChannels { got: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { op, left, right } => write!(
                f,
                "{op}: dimension mismatch between {}x{} and {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            Error::NonFinite { what } => write!(f, "{what} must be finite"),
            Error::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max asymmetry {max_asymmetry:e})")
            }
            Error::NotPositiveDefinite { pivot, index } => write!(
                f,
                "matrix is not positive definite (pivot {pivot:e} at index {index})"
            ),
            Error::InvalidArgument { what } => write!(f, "invalid argument: {what}"),
            Error::QDimension {
                expected,
                rows,
                cols,
            } => write!(
                f,
                "process-noise covariance must be {expected}x{expected} for this driver, got {rows}x{cols}"
            ),
            Error::UnstableAr => write!(
                f,
                "autoregressive polynomial is unstable (root on or outside the unit circle)"
            ),
            Error::BlockTooShort { needed, got } => {
                write!(f, "historical block too short: need at least {needed}, got {got}")
            }
            Error::ZeroImpulseEnergy => {
                write!(f, "impulse response has zero energy (all theta coefficients zero)")
            }
            Error::NonPositiveInnovationVariance { value } => {
                write!(f, "innovation variance {value:e} is not positive")
            }
            Error::ExtremaNeedsOrderTwo { k } => {
                write!(f, "extrema detection needs K >= 2, got K = {k}")
            }
            Error::ChannelLengthMismatch { first, other } => {
                write!(f, "channel lengths differ: {first} vs {other}")
            }
            Error::TooFewChannels { got } => {
                write!(f, "need at least 2 channels, got {got}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
