//! Turtle reader and writer.
//!
//! The reader covers prefixes and base directives (both `@` and SPARQL
//! styles), `a`, predicate/object lists, literal datatypes and language
//! tags, numeric and boolean shorthand, blank node labels, anonymous blank
//! nodes and collections.

mod parser;
mod writer;

pub use parser::{parse_turtle, parse_turtle_with_prefixes};
pub use writer::serialize_turtle;
