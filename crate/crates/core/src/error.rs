use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors shared by all modules.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    Domain(&'static str),
    /// A series or iteration hit its term cap before meeting tolerance.
    Convergence(&'static str),
    /// A numerical routine finished but could not certify the requested
    /// accuracy; carries the best estimate and its error estimate.
    Accuracy {
        what: &'static str,
        best: f64,
        err_est: f64,
    },
    /// A path simulation ran past its time cutoff without terminating.
    Censored,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Convergence(msg) => write!(f, "convergence error: {msg}"),
            Error::Accuracy {
                what,
                best,
                err_est,
            } => write!(
                f,
                "accuracy error: {what} (best estimate {best:e}, error estimate {err_est:e})"
            ),
            Error::Censored => write!(f, "path censored at max_time"),
        }
    }
}

impl core::error::Error for Error {}
