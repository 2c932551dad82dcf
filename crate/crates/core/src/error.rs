use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input document. `locus` names the line/column or field.
    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },

    /// A value outside its admissible domain (e.g. a non-positive rate).
    #[error("domain error in `{field}`: {message}")]
    Domain { field: String, message: String },

    /// The inputs violate a hypothesis a closed form depends on.
    #[error("{hypothesis} hypothesis violated: {message}")]
    Hypothesis { hypothesis: String, message: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("serve-set assignment did not converge after {sweeps} sweeps (last assignment {last:?})")]
    NonConvergence { sweeps: usize, last: Vec<usize> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Domain { field: field.into(), message: message.into() }
    }

    pub(crate) fn hypothesis(hypothesis: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Hypothesis { hypothesis: hypothesis.into(), message: message.into() }
    }

    pub(crate) fn parse(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { locus: locus.into(), message: message.into() }
    }

    /// True for errors caused by unreadable or malformed input rather than by
    /// the model itself.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_))
    }
}
