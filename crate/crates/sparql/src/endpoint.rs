use crate::{QueryResult, Result};

/// Query/update capability shared by the embedded store and remote
/// endpoints. `query` never mutates; `update` is atomic per call.
pub trait SparqlEndpoint: Send + Sync {
    fn query(&self, text: &str) -> Result<QueryResult>;
    fn update(&self, text: &str) -> Result<()>;
    /// Human-readable location used in error messages.
    fn describe(&self) -> String;
}

impl<T: SparqlEndpoint + ?Sized> SparqlEndpoint for std::sync::Arc<T> {
    fn query(&self, text: &str) -> Result<QueryResult> {
        (**self).query(text)
    }
    fn update(&self, text: &str) -> Result<()> {
        (**self).update(text)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}
