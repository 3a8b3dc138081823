use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures grouped by who has to act on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0}")]
    BadRequest(String),

    #[error("{0}")]
    NotFound(String),

    #[error("{0}")]
    Conflict(String),

    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}

impl From<ontoquery_core::Error> for Error {
    fn from(e: ontoquery_core::Error) -> Self {
        if e.is_user_error() {
            Error::BadRequest(e.to_string())
        } else {
            Error::Internal(e.to_string())
        }
    }
}

impl From<ontoquery_sparql::Error> for Error {
    fn from(e: ontoquery_sparql::Error) -> Self {
        ontoquery_core::Error::from(e).into()
    }
}

impl From<ontoquery_rdf::Error> for Error {
    fn from(e: ontoquery_rdf::Error) -> Self {
        Error::BadRequest(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Internal(e.to_string())
    }
}
