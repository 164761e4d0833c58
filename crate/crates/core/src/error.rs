use thiserror::Error;

/// Errors surfaced by the numerical routines in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {context}: {message}")]
    Domain { context: &'static str, message: String },

    /// Adaptive quadrature ran out of subdivisions before meeting the
    /// requested tolerance. Carries the best estimate and its error bound.
    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound} (requested {requested})")]
    QuadratureNoConverge {
        estimate: f64,
        error_bound: f64,
        requested: f64,
    },

    /// A bisection bracket whose endpoints give the same predicate verdict.
    #[error("invalid bracket [{lo}, {hi}]: predicate is {verdict} at both ends")]
    InvalidBracket { lo: f64, hi: f64, verdict: bool },

    /// The bisection predicate flipped non-monotonically along the trace.
    #[error("bisection predicate is not monotone in alpha: false verdict at {alpha_false} above true verdict at {alpha_true}")]
    NonMonotonePredicate { alpha_false: f64, alpha_true: f64 },

    /// A precondition on an operation's input was violated.
    #[error("precondition violated in {context}: {message}")]
    Precondition { context: &'static str, message: String },

    /// A measurement vector contains a zero entry, so the spectral weights
    /// 1 - d/y are undefined.
    #[error("degenerate measurement: y_bar[{index}] = 0")]
    DegenerateMeasurement { index: usize },

    /// Iterative eigensolver failed to converge.
    #[error("power iteration did not converge after {iterations} iterations (residual {residual})")]
    EigenNoConverge { iterations: usize, residual: f64 },

    /// Barrier objective evaluated at or outside the unit ball.
    #[error("barrier domain error: ||x|| = {norm} >= 1")]
    BarrierDomain { norm: f64 },

    /// Stored and recomputed instance data disagree.
    #[error("instance consistency check failed: {message}")]
    InconsistentInstance { message: String },
}

impl Error {
    pub(crate) fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { context, message: message.into() }
    }

    pub(crate) fn precondition(context: &'static str, message: impl Into<String>) -> Self {
        Error::Precondition { context, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
