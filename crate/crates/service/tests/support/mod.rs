#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use ontoquery_core::fixtures::{self, tc};
use ontoquery_core::ingest::IngestOptions;
use ontoquery_core::{Document, Nodegroup};
use ontoquery_rdf::{Iri, UuidMinter};
use ontoquery_service::store::GraphStore;
use ontoquery_service::{FixedEndpoint, Service};
use ontoquery_sparql::EmbeddedStore;
use serde_json::Value;
use tower::ServiceExt;

pub const STORE_GRAPH: &str = "http://ontoquery/nodegroups";

/// A service over an embedded store holding the fixture model, with
/// nodegroups kept in a graph of the same store.
pub fn service(batch_rows: usize) -> (Service, Arc<EmbeddedStore>) {
    let conn = fixtures::connection();
    let store = Arc::new(EmbeddedStore::new());
    store.load_graph(&conn.model_graphs()[0], &fixtures::model_graph());
    let ng_store = GraphStore::new(store.clone(), Iri::new_unchecked(STORE_GRAPH));
    let svc = Service::builder(Arc::new(FixedEndpoint(store.clone())), Arc::new(ng_store))
        .connection(conn)
        .minter(UuidMinter::seeded(7))
        .ingest_options(IngestOptions { batch_rows })
        .build();
    (svc, store)
}

/// The chain nodegroup with `?testNum` awaiting a runtime value.
pub fn runtime_chain() -> Nodegroup {
    let mut ng = fixtures::chain_nodegroup();
    ng.set_runtime_constrained("?Test", &tc("testNum"), true).unwrap();
    ng
}

pub fn document_json(ng: Nodegroup) -> Value {
    serde_json::from_str(&Document::new(ng).to_json()).unwrap()
}

pub fn ingest_json() -> Value {
    serde_json::from_str(fixtures::INGEST_NG_JSON).unwrap()
}

/// The sample CSV repeated with test numbers `first..first + copies`.
pub fn replicated_csv(first: u64, copies: u64) -> String {
    let mut lines = fixtures::SAMPLE_CSV.lines();
    let mut out = format!("{}\n", lines.next().unwrap());
    let rows: Vec<&str> = lines.collect();
    for k in 0..copies {
        for r in &rows {
            let rest = r.split_once(',').unwrap().1;
            out.push_str(&format!("{},{rest}\n", first + k));
        }
    }
    out
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b)),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body.to_string())).await
}

pub async fn post_text(app: &Router, uri: &str, body: &str) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body.to_string())).await
}

/// Polls a job to completion, returning every percentage seen and the
/// final status.
pub async fn poll(app: &Router, job: &str) -> (Vec<u64>, Value) {
    let mut seen = Vec::new();
    for _ in 0..20_000 {
        let (code, status) = get(app, &format!("/jobs/{job}/status")).await;
        assert_eq!(code, StatusCode::OK, "{status}");
        seen.push(status["percentComplete"].as_u64().unwrap());
        if matches!(status["state"].as_str(), Some("Succeeded" | "Failed")) {
            return (seen, status);
        }
        tokio::time::sleep(std::time::Duration::from_millis(1)).await;
    }
    panic!("job {job} did not finish");
}

/// Rows of a table result as `column=value` strings per row, sorted.
pub fn table_rows(result: &Value) -> Vec<Vec<String>> {
    let table = &result["table"];
    let vars: Vec<&str> = table["head"]["vars"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let mut rows: Vec<Vec<String>> = table["results"]["bindings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| {
            vars.iter()
                .map(|v| format!("{v}={}", b[v]["value"].as_str().unwrap_or("")))
                .collect()
        })
        .collect();
    rows.sort();
    rows
}
