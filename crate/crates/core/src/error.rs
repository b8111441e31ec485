use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("non-finite performance value at x = {x:?}")]
    NonFiniteValue { x: Vec<f64> },

    #[error("shooting did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value {value} outside the open interval ({lower}, {upper})")]
    OutOfRange { value: f64, lower: f64, upper: f64 },

    #[error("time {t} outside the window [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("derivative order {0} is not supported (maximum 3)")]
    UnsupportedOrder(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("transition {k}: {source}")]
    Transition {
        k: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_transition(self, k: usize) -> Self {
        Error::Transition {
            k,
            source: Box::new(self),
        }
    }

    /// Strips any transition context.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Transition { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
