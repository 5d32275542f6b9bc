use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which side of the convergence disc a rejected `t = |z|²` fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscViolation {
    /// `t ≥ 1/(1-q)`: the series diverges.
    Outside,
    /// Inside the disc but past `guard · radius`, where truncation cost blows up.
    BeyondGuard,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{}", disc_message(*t, *radius, *guard, *kind))]
    OutOfDisc {
        t: f64,
        radius: f64,
        guard: f64,
        kind: DiscViolation,
    },

    #[error("series did not reach tolerance {tolerance:e} within {cap} terms (t = {t})")]
    NonConvergent { t: f64, tolerance: f64, cap: usize },

    #[error("observable undefined at the vacuum (z = 0)")]
    DegenerateState,

    #[error("invalid deformed-commutator parameters: {0}")]
    InvalidGupParams(String),

    #[error("invalid value for `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }

    /// True for `OutOfDisc` and `NonConvergent`.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::OutOfDisc { .. } | Error::NonConvergent { .. }
        )
    }

    pub fn disc_violation(&self) -> Option<DiscViolation> {
        match self {
            Error::OutOfDisc { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}

fn disc_message(t: f64, radius: f64, guard: f64, kind: DiscViolation) -> String {
    match kind {
        DiscViolation::Outside => {
            format!("t = {t} is outside the disc of convergence (radius {radius})")
        }
        DiscViolation::BeyondGuard => format!(
            "t = {t} is inside the disc (radius {radius}) but beyond the guard {guard} x radius"
        ),
    }
}
