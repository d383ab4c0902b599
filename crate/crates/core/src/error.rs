use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value:e} is out of range (requires {requirement})")]
    Domain {
        what: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integrand returned {value} at x = {x:e}")]
    NonFiniteIntegrand { x: f64, value: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         best estimate {estimate:e} with error {error_estimate:e}"
    )]
    QuadratureNotConverged {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("invalid minimization bracket ({lo:e}, {mid:e}, {hi:e}): {reason}")]
    InvalidBracket {
        lo: f64,
        mid: f64,
        hi: f64,
        reason: &'static str,
    },

    #[error("objective returned {value} at x = {x:e}")]
    NonFiniteObjective { x: f64, value: f64 },

    #[error("no sign change on [{lo:e}, {hi:e}]: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, requirement: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            requirement,
        }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping context wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root_cause(),
            other => other,
        }
    }

    /// True for errors caused by caller-supplied parameters rather than by
    /// a numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self.root_cause(),
            Error::Domain { .. } | Error::InvalidInput(_) | Error::InvalidBracket { .. }
        )
    }
}
