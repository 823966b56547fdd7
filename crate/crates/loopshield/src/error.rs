//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by simulation, identification, and compensation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Two transfer functions with different sample times were composed.
    #[error("sample time mismatch: {0} s vs {1} s")]
    SampleTimeMismatch(f64, f64),

    /// A polynomial without the degree required by the operation.
    #[error("degenerate polynomial: {0}")]
    DegeneratePolynomial(String),

    /// Numerator degree exceeds denominator degree.
    #[error(
        "improper transfer function: numerator degree {num_deg} > denominator degree {den_deg}"
    )]
    Improper { num_deg: usize, den_deg: usize },

    /// A parameter outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Not enough data points to build at least one regressor row.
    #[error("insufficient samples: got {got}, need more than {required}")]
    InsufficientSamples { got: usize, required: usize },

    /// The regressor matrix is numerically rank deficient.
    #[error("ill-conditioned regressor (condition estimate {cond:.3e} exceeds {limit:.0e})")]
    IllConditioned { cond: f64, limit: f64 },

    /// The detector was stepped before its thresholds were fitted.
    #[error("detector stepped during the secure phase (thresholds not yet fitted)")]
    SecurePhase,

    /// A gain sweep found no stable cell.
    #[error("stability region is empty: no (kp, ki) cell is stable")]
    EmptyStableRegion,

    /// Explicitly requested gains fail the stability check.
    #[error("gains (kp={kp}, ki={ki}) do not stabilize the identified loop")]
    UnstableGains { kp: f64, ki: f64 },

    /// Scenario-level validation failure.
    #[error("scenario: {0}")]
    Scenario(String),

    /// Scenario file parse or schema failure; names the offending field when known.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
