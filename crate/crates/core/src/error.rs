use thiserror::Error;

/// Errors raised by the numerical and geometric routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    Domain(String),

    /// The gamma/digamma family was evaluated at a pole.
    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: f64 },

    /// Two hyperplanes are tangent (they meet at a single ideal point).
    #[error("hyperplanes are tangent at infinity (inversive distance {inversive_distance})")]
    Tangent { inversive_distance: f64 },

    /// Two hyperplanes intersect, so no common perpendicular exists.
    #[error("hyperplanes intersect (inversive distance {inversive_distance})")]
    Intersecting { inversive_distance: f64 },

    /// An iterative method ran out of budget before reaching its tolerance.
    #[error("no convergence: achieved error {achieved:e}, requested {requested:e}")]
    NotConverged { achieved: f64, requested: f64 },

    /// Enumeration stopped at a configured size limit.
    #[error("budget exhausted after {produced} items")]
    Budget { produced: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
