//! Ontology-driven query building: the ontology cache, nodegroups,
//! pathfinding between classes, SPARQL generation and CSV ingestion.

pub mod connection;
mod error;
pub mod fixtures;
pub mod ingest;
pub mod nodegroup;
pub mod oinfo;
pub mod pathfind;
pub mod sparqlgen;

pub use connection::Connection;
pub use error::{Error, Result};
pub use nodegroup::{Document, Nodegroup};
pub use oinfo::OntologyInfo;
