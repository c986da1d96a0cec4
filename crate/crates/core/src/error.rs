use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by the analytical and simulation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the formula.
    Domain { what: &'static str, value: f64 },
    /// A configuration is internally inconsistent.
    Config(String),
    /// Exhaustive search would exceed its enumeration budget.
    Infeasible {
        what: &'static str,
        required: f64,
        limit: f64,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain (got {value})"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Infeasible {
                what,
                required,
                limit,
            } => write!(
                f,
                "exhaustive search infeasible: {what} needs {required:.0} candidates, limit is {limit:.0}; use the greedy mode"
            ),
        }
    }
}

impl core::error::Error for Error {}
