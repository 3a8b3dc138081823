//! JSON over HTTP.

use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ontoquery_core::pathfind::PathConfig;
use ontoquery_core::sparqlgen::{QueryType, RuntimeConstraintValue};
use ontoquery_core::{Connection, Document};
use ontoquery_rdf::Iri;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::service::{ExecuteOptions, NewNodegroup, Service};
use crate::{Error, Result};

impl IntoResponse for Error {
    fn into_response(self) -> Response {
        let status = match &self {
            Error::BadRequest(_) => StatusCode::BAD_REQUEST,
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Conflict(_) => StatusCode::CONFLICT,
            Error::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

type Reply = Result<Response>;

/// Runs blocking service work off the async executor.
async fn blocking<T, F>(f: F) -> Result<T>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| Error::Internal(format!("worker failed: {e}")))?
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T> {
    serde_json::from_slice(body).map_err(|e| Error::BadRequest(format!("malformed request body: {e}")))
}

/// Documents arrive as JSON values and go through the versioned parser.
fn document(value: &Value) -> Result<Document> {
    Ok(Document::parse_unchecked(&value.to_string())?)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PutBody {
    id: String,
    #[serde(default)]
    comments: String,
    #[serde(default)]
    creator: String,
    #[serde(alias = "nodegroupDocument")]
    document: Value,
    connection: Option<Connection>,
    #[serde(default)]
    overwrite: bool,
}

async fn put_nodegroup(State(svc): State<Service>, body: Bytes) -> Reply {
    let body: PutBody = parse_json(&body)?;
    let new = NewNodegroup {
        id: body.id,
        comments: body.comments,
        creator: body.creator,
        document: document(&body.document)?,
        connection: body.connection,
    };
    let overwrite = body.overwrite;
    let sn = blocking(move || svc.store_put(new, overwrite)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": sn.id, "creationDate": sn.creation_date })))
        .into_response())
}

async fn list_nodegroups(State(svc): State<Service>) -> Reply {
    let entries = blocking(move || svc.store_list()).await?;
    Ok(Json(entries).into_response())
}

async fn get_nodegroup(State(svc): State<Service>, Path(id): Path<String>) -> Reply {
    let sn = blocking(move || svc.store_get(&id)).await?;
    Ok(Json(sn).into_response())
}

async fn delete_nodegroup(State(svc): State<Service>, Path(id): Path<String>) -> Reply {
    blocking(move || svc.store_delete(&id)).await?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase")]
struct ExecuteBody {
    query_type: Option<QueryType>,
    #[serde(default, deserialize_with = "constraint_list")]
    runtime_constraints: Vec<RuntimeConstraintValue>,
    limit_override: Option<u64>,
}

/// Each runtime constraint is either its structured form or the
/// `id=op:value` shorthand.
fn constraint_list<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<RuntimeConstraintValue>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Input {
        Text(String),
        Value(RuntimeConstraintValue),
    }
    Vec::<Input>::deserialize(d)?
        .into_iter()
        .map(|i| match i {
            Input::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Input::Value(v) => Ok(v),
        })
        .collect()
}

impl From<ExecuteBody> for ExecuteOptions {
    fn from(b: ExecuteBody) -> Self {
        ExecuteOptions {
            query_type: b.query_type,
            runtime_constraints: b.runtime_constraints,
            limit_override: b.limit_override,
        }
    }
}

fn accepted(job_id: String) -> Response {
    (StatusCode::ACCEPTED, Json(json!({ "jobId": job_id }))).into_response()
}

async fn execute_stored(State(svc): State<Service>, Path(id): Path<String>, body: Bytes) -> Reply {
    let body: ExecuteBody = if body.iter().all(u8::is_ascii_whitespace) {
        ExecuteBody::default()
    } else {
        parse_json(&body)?
    };
    let job = blocking(move || svc.execute_by_id(&id, body.into())).await?;
    Ok(accepted(job))
}

async fn ingest_stored(State(svc): State<Service>, Path(id): Path<String>, body: Bytes) -> Reply {
    let csv = String::from_utf8(body.to_vec()).map_err(|_| Error::BadRequest("CSV body is not UTF-8".into()))?;
    let job = blocking(move || svc.ingest_by_id(&id, csv)).await?;
    Ok(accepted(job))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct AdHocBody {
    #[serde(alias = "nodegroupDocument")]
    document: Value,
    connection: Option<Connection>,
    #[serde(flatten)]
    execute: ExecuteBody,
}

async fn execute_adhoc(State(svc): State<Service>, body: Bytes) -> Reply {
    let body: AdHocBody = parse_json(&body)?;
    let doc = document(&body.document)?;
    let conn = svc.document_connection(&doc, body.connection.as_ref())?;
    Ok(accepted(svc.submit_execute(doc, conn, body.execute.into())))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct AdHocIngestBody {
    #[serde(alias = "nodegroupDocument")]
    document: Value,
    connection: Option<Connection>,
    csv: String,
}

async fn ingest_adhoc(State(svc): State<Service>, body: Bytes) -> Reply {
    let body: AdHocIngestBody = parse_json(&body)?;
    let doc = document(&body.document)?;
    let conn = svc.document_connection(&doc, body.connection.as_ref())?;
    Ok(accepted(svc.submit_ingest(doc, conn, body.csv)?))
}

async fn job_status(State(svc): State<Service>, Path(id): Path<String>) -> Reply {
    Ok(Json(svc.jobs().status(&id)?).into_response())
}

async fn job_results(State(svc): State<Service>, Path(id): Path<String>) -> Reply {
    Ok(Json(svc.jobs().results(&id)?.to_json()).into_response())
}

async fn generate_query(State(svc): State<Service>, body: Bytes) -> Reply {
    let body: AdHocBody = parse_json(&body)?;
    let doc = document(&body.document)?;
    let q = blocking(move || {
        let conn = svc.document_connection(&doc, body.connection.as_ref())?;
        svc.generate(&doc, &conn, &body.execute.into())
    })
    .await?;
    Ok(Json(json!({ "sparql": q.text, "queryType": q.query_type, "returnedIds": q.returned_ids })).into_response())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PathsBody {
    class_iri: String,
    #[serde(default)]
    anchor_class_iris: Vec<String>,
    #[serde(default)]
    config: Option<PathConfig>,
    connection: Option<Connection>,
}

async fn paths_find(State(svc): State<Service>, body: Bytes) -> Reply {
    let body: PathsBody = parse_json(&body)?;
    let paths = blocking(move || {
        let conn = svc.connection(body.connection.as_ref())?;
        svc.find_paths(&conn, &body.class_iri, &body.anchor_class_iris, &body.config.unwrap_or_default())
    })
    .await?;
    let out: Vec<Value> = paths
        .iter()
        .map(|p| {
            let mut v = serde_json::to_value(p).unwrap_or(Value::Null);
            v["description"] = Value::String(p.describe());
            v["length"] = json!(p.len());
            v
        })
        .collect();
    Ok(Json(json!({ "paths": out })).into_response())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct SuggestBody {
    nodegroup_document: Option<Value>,
    id: Option<String>,
    target_sparql_id: String,
    connection: Option<Connection>,
}

async fn values_suggest(State(svc): State<Service>, body: Bytes) -> Reply {
    let body: SuggestBody = parse_json(&body)?;
    let values = blocking(move || {
        let (doc, conn) = match (&body.nodegroup_document, &body.id) {
            (Some(d), _) => {
                let doc = document(d)?;
                let conn = svc.document_connection(&doc, body.connection.as_ref())?;
                (doc, conn)
            }
            (None, Some(id)) => {
                let sn = svc.store_get(id)?;
                (sn.document, sn.connection)
            }
            (None, None) => return Err(Error::BadRequest("give nodegroupDocument or id".into())),
        };
        svc.suggest_values(&doc, &conn, &body.target_sparql_id)
    })
    .await?;
    let values: Vec<&str> = values.iter().map(|t| t.str_value()).collect();
    Ok(Json(json!({ "values": values })).into_response())
}

async fn ontology_info(State(svc): State<Service>) -> Reply {
    let oinfo = blocking(move || {
        let conn = svc.connection(None)?;
        svc.ontology(&conn)
    })
    .await?;
    Ok(Json(&*oinfo).into_response())
}

#[derive(Deserialize)]
struct GraphParam {
    graph: Option<String>,
}

async fn model_load(State(svc): State<Service>, Query(q): Query<GraphParam>, body: Bytes) -> Reply {
    let ttl = String::from_utf8(body.to_vec()).map_err(|_| Error::BadRequest("Turtle body is not UTF-8".into()))?;
    let n = blocking(move || {
        let conn = svc.connection(None)?;
        let graph = q.graph.map(Iri::new).transpose()?;
        svc.load_model(&conn, graph, &ttl)
    })
    .await?;
    Ok(Json(json!({ "triples": n })).into_response())
}

async fn sparql(State(svc): State<Service>, body: Bytes) -> Reply {
    let text = String::from_utf8(body.to_vec()).map_err(|_| Error::BadRequest("query is not UTF-8".into()))?;
    let result = blocking(move || {
        let conn = svc.connection(None)?;
        svc.sparql(&conn, &text)
    })
    .await?;
    Ok(Json(result.to_json()).into_response())
}

/// Every route; static files from `ui_dir` answer anything else.
pub fn router(svc: Service, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/nodegroups", post(put_nodegroup).get(list_nodegroups))
        .route("/nodegroups/{id}", get(get_nodegroup).delete(delete_nodegroup))
        .route("/nodegroups/{id}/execute", post(execute_stored))
        .route("/nodegroups/{id}/ingest", post(ingest_stored))
        .route("/jobs/{id}/status", get(job_status))
        .route("/jobs/{id}/results", get(job_results))
        .route("/query/generate", post(generate_query))
        .route("/query/execute", post(execute_adhoc))
        .route("/ingest", post(ingest_adhoc))
        .route("/paths/find", post(paths_find))
        .route("/values/suggest", post(values_suggest))
        .route("/ontology/info", get(ontology_info))
        .route("/model/load", post(model_load))
        .route("/sparql", post(sparql))
        .with_state(svc);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(svc: Service, addr: std::net::SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(svc, ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
