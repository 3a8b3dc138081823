//! SPARQL for the query shapes the generator emits.
//!
//! [`parse_query`] reads the supported subset into a [`Query`] AST whose
//! `Display` output re-parses to the same AST. [`EmbeddedStore`] evaluates
//! that AST over in-memory graphs with a left-deep nested-loop join that
//! follows textual pattern order, and [`HttpEndpoint`] speaks the
//! SPARQL 1.1 protocol to an external store. Both implement
//! [`SparqlEndpoint`].

pub mod ast;
mod endpoint;
mod error;
mod eval;
mod http;
mod lexer;
mod parser;
pub mod results;
mod store;

pub use ast::Query;
pub use endpoint::SparqlEndpoint;
pub use error::{Error, Result};
pub use eval::{EvalConfig, EvalStats};
pub use http::{BasicAuth, HttpEndpoint};
pub use parser::parse_query;
pub use results::{QueryResult, ResultTable};
pub use store::{EmbeddedStore, DEFAULT_GRAPH};
