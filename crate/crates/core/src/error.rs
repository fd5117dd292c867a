use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the radius (or interval) where a formula is valid.
    #[error("{what}: argument {value} outside valid range {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("point is not on the manifold: {0}")]
    InvalidPoint(String),

    #[error("vector is not tangent at the base point: {0}")]
    InvalidTangent(String),

    #[error("target point lies in the cut locus of the base point: {0}")]
    CutLocus(String),

    #[error("differential of exp is singular or nearly singular at |v| = {radius}")]
    ConjugatePoint { radius: f64 },

    #[error("{operation} is not supported on {manifold}")]
    Unsupported { operation: &'static str, manifold: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value,
            range: range.into(),
        }
    }

    pub(crate) fn unsupported(operation: &'static str, manifold: impl Into<String>) -> Self {
        Error::Unsupported {
            operation,
            manifold: manifold.into(),
        }
    }
}
