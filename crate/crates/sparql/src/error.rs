use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("SPARQL syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("evaluation exceeded the cap of {0} intermediate bindings")]
    SolutionCap(usize),

    #[error("expected a query, got an update")]
    NotAQuery,

    #[error("expected an update, got a query")]
    NotAnUpdate,

    #[error("endpoint {url} returned HTTP {status}: {body}")]
    Http { url: String, status: u16, body: String },

    #[error("endpoint {url} unreachable: {message}")]
    Transport { url: String, message: String },

    #[error("malformed results: {0}")]
    ResultFormat(String),
}

impl From<ontoquery_rdf::Error> for Error {
    fn from(e: ontoquery_rdf::Error) -> Self {
        match e {
            ontoquery_rdf::Error::Syntax { line, column, message } => Error::ResultFormat(format!(
                "turtle at {line}:{column}: {message}"
            )),
            other => Error::ResultFormat(other.to_string()),
        }
    }
}
