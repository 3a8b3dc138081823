//! RDF data model used throughout the workspace: terms, triples, graphs,
//! prefix maps, a Turtle reader/writer, XSD literal validation and IRI
//! minting from UUIDs.

mod error;
mod graph;
mod mint;
mod prefix;
mod term;
pub mod turtle;
pub mod vocab;
pub mod xsd;

pub use error::{Error, Result};
pub use graph::{Graph, Triple};
pub use mint::{make_uuid_iri, UuidMinter, UUID_SEED_ENV};
pub use prefix::PrefixMap;
pub use term::{escape_string, BlankNode, Iri, Literal, Term};
pub use turtle::{parse_turtle, serialize_turtle};
pub use xsd::validate_literal;
