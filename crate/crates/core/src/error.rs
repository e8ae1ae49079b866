use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },

    #[error("{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },

    #[error("epsilon {given} disagrees with sqrt(c1^2 + c2^2)/omega^3 = {computed}")]
    InconsistentEpsilon { given: f64, computed: f64 },

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),

    /// A Runge-Kutta stage saw `y <= 0`.
    #[error("positivity violation: y = {value} at time {time}")]
    PositivityViolation { time: f64, value: f64 },

    /// A Runge-Kutta stage saw `w <= 0` in the Ermakov-Pinney equation.
    #[error("positivity violation: w = {value} at time {time}")]
    PositivityViolationW { time: f64, value: f64 },

    #[error("non-finite state at time {time}")]
    NonFinite { time: f64 },

    #[error("|z| = {z} exceeded escape threshold at time {time}")]
    Escape { time: f64, z: f64 },

    #[error("alpha2 must be positive, got {0}")]
    NonPositiveY(f64),

    #[error("w must be positive, got {0}")]
    NonPositiveW(f64),

    #[error("perturbative invariant coefficients need omega = 1, got {0}")]
    UnsupportedOmega(f64),

    #[error("perturbative series assume a pure cosine forcing (c2 = 0), got c2 = {0}")]
    UnsupportedForcing(f64),

    #[error("truncation order must be 1, 2 or 3, got {0}")]
    UnsupportedOrder(u8),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("need at least {needed} windows, got {got}")]
    InsufficientWindows { needed: usize, got: usize },

    #[error("logistic seed {0} outside [0, 1]")]
    OutOfRange(f64),

    #[error("driver coefficient f = {value} is not positive at t = {time}")]
    NonPositiveF { time: f64, value: f64 },
}
