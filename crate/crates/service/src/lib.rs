//! Named nodegroup storage, asynchronous jobs, the REST API and the
//! command line.

pub mod cli;
mod error;
pub mod jobs;
pub mod persist;
pub mod rest;
pub mod service;
pub mod store;

pub use error::{Error, Result};
pub use service::{EndpointResolver, ExecuteOptions, FixedEndpoint, NewNodegroup, RemoteEndpoints, Service};
