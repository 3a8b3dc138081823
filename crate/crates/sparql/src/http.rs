use std::time::Duration;

use base64::Engine;
use ontoquery_rdf::parse_turtle;
use ureq::Agent;

use crate::results::{parse_results_json, QueryResult};
use crate::{Error, Result, SparqlEndpoint};

const BODY_LIMIT: u64 = 512 * 1024 * 1024;
const SNIPPET: usize = 300;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicAuth {
    pub user: String,
    pub password: String,
}

impl BasicAuth {
    fn header(&self) -> String {
        let raw = format!("{}:{}", self.user, self.password);
        format!("Basic {}", base64::engine::general_purpose::STANDARD.encode(raw))
    }
}

/// SPARQL 1.1 protocol client. Queries and updates are sent as POST bodies.
#[derive(Debug, Clone)]
pub struct HttpEndpoint {
    query_url: String,
    update_url: String,
    auth: Option<BasicAuth>,
    agent: Agent,
}

impl HttpEndpoint {
    /// Endpoint that accepts both queries and updates at `url`.
    pub fn new(url: impl Into<String>) -> Self {
        let url = url.into();
        HttpEndpoint {
            query_url: url.clone(),
            update_url: url,
            auth: None,
            agent: agent(Duration::from_secs(300)),
        }
    }

    pub fn with_update_url(mut self, url: impl Into<String>) -> Self {
        self.update_url = url.into();
        self
    }

    pub fn with_auth(mut self, auth: Option<BasicAuth>) -> Self {
        self.auth = auth;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.agent = agent(timeout);
        self
    }

    pub fn query_url(&self) -> &str {
        &self.query_url
    }

    fn post(&self, url: &str, content_type: &str, accept: &str, body: &str) -> Result<(String, String)> {
        let mut req = self
            .agent
            .post(url)
            .header("Content-Type", content_type)
            .header("Accept", accept);
        if let Some(auth) = &self.auth {
            req = req.header("Authorization", auth.header());
        }
        let transport = |e: ureq::Error| Error::Transport {
            url: url.to_string(),
            message: e.to_string(),
        };
        let mut resp = req.send(body).map_err(transport)?;
        let status = resp.status().as_u16();
        let ctype = resp
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or("")
            .to_ascii_lowercase();
        let text = resp
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_string()
            .map_err(transport)?;
        if !(200..300).contains(&status) {
            let mut body: String = text.chars().take(SNIPPET).collect();
            if body.len() < text.len() {
                body.push_str("...");
            }
            return Err(Error::Http {
                url: url.to_string(),
                status,
                body,
            });
        }
        Ok((ctype, text))
    }
}

fn agent(timeout: Duration) -> Agent {
    Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(timeout))
        .build()
        .into()
}

impl SparqlEndpoint for HttpEndpoint {
    fn query(&self, text: &str) -> Result<QueryResult> {
        let (ctype, body) = self.post(
            &self.query_url,
            "application/sparql-query",
            "application/sparql-results+json, text/turtle;q=0.9",
            text,
        )?;
        if ctype.contains("turtle") || ctype.contains("n-triples") {
            return Ok(QueryResult::Graph(parse_turtle(&body, None)?));
        }
        match parse_results_json(&body) {
            Ok(r) => Ok(r),
            Err(e) if ctype.contains("json") => Err(e),
            Err(e) => parse_turtle(&body, None).map(QueryResult::Graph).map_err(|_| e),
        }
    }

    fn update(&self, text: &str) -> Result<()> {
        self.post(&self.update_url, "application/sparql-update", "*/*", text).map(|_| ())
    }

    fn describe(&self) -> String {
        self.query_url.clone()
    }
}
