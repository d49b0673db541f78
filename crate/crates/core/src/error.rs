use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: unknown names, out-of-range parameters, malformed config.
    Validation,
    /// A computation could not be completed (drift, CFL, domain exit, NaN).
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("metric `{metric}` requires parameter `{param}`")]
    MissingParameter { metric: String, param: String },

    #[error("metric `{metric}` does not take parameter `{param}`")]
    UnknownParameter { metric: String, param: String },

    #[error("invalid {name} = {value}: requires {constraint}")]
    InvalidParameter {
        name: String,
        value: f64,
        constraint: String,
    },

    #[error("invalid sign {0}: expected -1 or +1")]
    InvalidSign(i64),

    #[error(
        "degenerate frame a = {a}, b = {b}, eps2 = {eps2}: b^2 = eps2*a^2 forces B(R) constant, \
         so R is constant and the Jacobian vanishes"
    )]
    DegenerateFrame { a: f64, b: f64, eps2: i8 },

    #[error("{quantity} = {value} lies outside the open interval ({lo}, {hi})")]
    OutsideDomain {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("coordinate singularity of `{metric}` at R = {r} (B(R) = {b})")]
    CoordinateSingularity { metric: String, r: f64, b: f64 },

    #[error("non-finite {quantity} at {at}")]
    NonFinite { quantity: &'static str, at: f64 },

    #[error("Phi(R0) = {phi} < 0 at R0 = {r}: no real solution starts here")]
    NegativePhi { r: f64, phi: f64 },

    #[error("invariant drift |R'^2 - Phi(R)| = {drift:e} exceeds budget {budget:e} at t = {t}")]
    DriftExceeded { t: f64, drift: f64, budget: f64 },

    #[error("R left the domain of `{metric}` at t = {t} (R = {r})")]
    LeftDomain { metric: String, t: f64, r: f64 },

    #[error("{needed} steps required but max_steps = {max_steps}")]
    MaxSteps { needed: usize, max_steps: usize },

    #[error("{family} closed form undefined at t = {t}: {reason}")]
    ClosedFormDomain {
        family: &'static str,
        t: f64,
        reason: String,
    },

    #[error("t = {t} outside the solution range [{lo}, {hi}]")]
    Extrapolation { t: f64, lo: f64, hi: f64 },

    #[error("CFL ratio {cfl} outside (0, 1]")]
    Cfl { cfl: f64 },

    #[error("wave evolution failed at step {step} (y = {y}): {reason}")]
    WaveBreakdown { step: usize, y: f64, reason: &'static str },

    #[error("{0}")]
    Invalid(String),

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("key `{key}`: cannot parse `{value}` as {expected}")]
    TypeMismatch {
        key: String,
        value: String,
        expected: &'static str,
    },

    #[error("`{subcommand}` requires `{key}`")]
    MissingKey { key: String, subcommand: String },

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            UnknownMetric(_)
            | MissingParameter { .. }
            | UnknownParameter { .. }
            | InvalidParameter { .. }
            | InvalidSign(_)
            | DegenerateFrame { .. }
            | Invalid(_)
            | UnknownKey(_)
            | TypeMismatch { .. }
            | MissingKey { .. }
            | Input(_) => ErrorKind::Validation,
            Io(_) => ErrorKind::Io,
            _ => ErrorKind::Numerical,
        }
    }

    pub(crate) fn invalid(name: impl Into<String>, value: f64, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            value,
            constraint: constraint.into(),
        }
    }
}
