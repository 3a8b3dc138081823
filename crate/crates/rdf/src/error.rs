use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not an absolute IRI: {0}")]
    RelativeIri(String),

    #[error("literal subject in triple")]
    LiteralSubject,

    #[error("turtle syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid lexical form {lexical:?} for {datatype}")]
    InvalidLiteral { lexical: String, datatype: String },
}
