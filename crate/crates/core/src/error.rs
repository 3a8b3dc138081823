use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown class {0}")]
    UnknownClass(String),

    #[error("unknown property {0}")]
    UnknownProperty(String),

    #[error("unknown sparql id {0}")]
    UnknownId(String),

    #[error("subclass cycle through {0}")]
    SubclassCycle(String),

    #[error("property {0} has no range")]
    EmptyRange(String),

    #[error("invalid {datatype} value {value:?}: {reason}")]
    InvalidValue {
        value: String,
        datatype: String,
        reason: String,
    },

    #[error("invalid nodegroup: {0}")]
    InvalidNodegroup(String),

    #[error("unsatisfied runtime constraint {0}")]
    UnsatisfiedRuntimeConstraint(String),

    #[error("{0} is not runtime constrained")]
    NotRuntimeConstrained(String),

    #[error("cannot generate query: {0}")]
    Generation(String),

    #[error("unsupported nodegroup document version {0}")]
    UnsupportedVersion(u64),

    #[error("malformed document: {0}")]
    Document(String),

    #[error("invalid connection: {0}")]
    Connection(String),

    #[error("invalid path: {0}")]
    Path(String),

    #[error("invalid import spec: {0}")]
    ImportSpec(String),

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("invalid regular expression {pattern:?}: {message}")]
    Regex { pattern: String, message: String },

    #[error(transparent)]
    Sparql(#[from] ontoquery_sparql::Error),

    #[error(transparent)]
    Rdf(#[from] ontoquery_rdf::Error),
}

impl Error {
    pub(crate) fn regex(pattern: &str, err: regex::Error) -> Self {
        Error::Regex {
            pattern: pattern.to_string(),
            message: err.to_string(),
        }
    }

    /// True for errors caused by the caller's input rather than the
    /// environment (endpoints, I/O).
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            Error::Sparql(
                ontoquery_sparql::Error::Http { .. }
                    | ontoquery_sparql::Error::Transport { .. }
                    | ontoquery_sparql::Error::ResultFormat(_)
                    | ontoquery_sparql::Error::SolutionCap(_)
            )
        )
    }
}
