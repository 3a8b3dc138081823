use regex::Regex;
use serde::{Deserialize, Serialize};

use ontoquery_rdf::Iri;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EndpointRef {
    pub server_url: String,
    pub graph: Iri,
}

/// Where the ontology and the instance data live, and which IRIs belong
/// to the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Connection {
    pub name: String,
    pub model_endpoints: Vec<EndpointRef>,
    pub data_endpoints: Vec<EndpointRef>,
    pub domain_regex: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth: Option<Credentials>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credentials {
    pub user: String,
    pub password: String,
}

impl Connection {
    /// A connection whose model and data sit in two graphs of one store.
    pub fn single_store(name: &str, server_url: &str, model_graph: Iri, data_graph: Iri, domain_regex: &str) -> Self {
        Connection {
            name: name.to_string(),
            model_endpoints: vec![EndpointRef {
                server_url: server_url.to_string(),
                graph: model_graph,
            }],
            data_endpoints: vec![EndpointRef {
                server_url: server_url.to_string(),
                graph: data_graph,
            }],
            domain_regex: domain_regex.to_string(),
            auth: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let conn: Connection = serde_json::from_str(text).map_err(|e| Error::Connection(e.to_string()))?;
        conn.validate()?;
        Ok(conn)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_endpoints.is_empty() {
            return Err(Error::Connection("no model endpoint".into()));
        }
        if self.data_endpoints.is_empty() {
            return Err(Error::Connection("no data endpoint".into()));
        }
        self.domain()?;
        Ok(())
    }

    pub fn domain(&self) -> Result<Regex> {
        Regex::new(&self.domain_regex).map_err(|e| Error::regex(&self.domain_regex, e))
    }

    pub fn model_graphs(&self) -> Vec<Iri> {
        self.model_endpoints.iter().map(|e| e.graph.clone()).collect()
    }

    pub fn data_graphs(&self) -> Vec<Iri> {
        self.data_endpoints.iter().map(|e| e.graph.clone()).collect()
    }

    /// Graph that receives inserts and deletes.
    pub fn first_data_graph(&self) -> Result<&Iri> {
        self.data_endpoints
            .first()
            .map(|e| &e.graph)
            .ok_or_else(|| Error::Connection("no data endpoint".into()))
    }
}
