//! REST flows against an embedded store, driven in-process.

mod support;

use axum::http::{Method, StatusCode};
use ontoquery_core::fixtures;
use ontoquery_service::rest::router;
use serde_json::json;
use support::*;

fn pairs(v: &[(&str, &str)]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = v
        .iter()
        .map(|(n, m)| vec![format!("testNum={n}"), format!("variableName={m}")])
        .collect();
    out.sort();
    out
}

#[tokio::test(flavor = "multi_thread")]
async fn store_ingest_and_execute_by_name() {
    let (svc, _) = service(2);
    let app = router(svc, None);

    let (code, body) = post(&app, "/nodegroups", json!({ "id": "sample-ingest", "document": ingest_json(), "creator": "qa" })).await;
    assert_eq!(code, StatusCode::CREATED, "{body}");
    let (code, _) = post(&app, "/nodegroups", json!({ "id": "chain", "nodegroupDocument": document_json(runtime_chain()) })).await;
    assert_eq!(code, StatusCode::CREATED);

    let (code, list) = get(&app, "/nodegroups").await;
    assert_eq!(code, StatusCode::OK);
    let ids: Vec<&str> = list.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["chain", "sample-ingest"]);

    let (code, job) = post_text(&app, "/nodegroups/sample-ingest/ingest", fixtures::SAMPLE_CSV).await;
    assert_eq!(code, StatusCode::ACCEPTED);
    let (seen, status) = poll(&app, job["jobId"].as_str().unwrap()).await;
    assert_eq!(status["state"], "Succeeded", "{status}");
    assert!(seen.windows(2).all(|w| w[0] <= w[1]), "{seen:?}");
    assert_eq!(*seen.last().unwrap(), 100);
    let (code, result) = get(&app, &format!("/jobs/{}/results", job["jobId"].as_str().unwrap())).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(result["report"]["rowsTotal"], 6);
    assert_eq!(result["report"]["rowsSucceeded"], 6);

    let run = |constraint: Option<&str>| {
        let body = match constraint {
            Some(c) => json!({ "runtimeConstraints": [c] }),
            None => json!({}),
        };
        let app = app.clone();
        async move {
            let (code, job) = post(&app, "/nodegroups/chain/execute", body).await;
            assert_eq!(code, StatusCode::ACCEPTED, "{job}");
            let job = job["jobId"].as_str().unwrap().to_string();
            let (_, status) = poll(&app, &job).await;
            let (code, result) = get(&app, &format!("/jobs/{job}/results")).await;
            (status, code, result)
        }
    };
    let (_, code, result) = run(Some("?testNum=matches:4242")).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(table_rows(&result), pairs(&[("4242", "status1"), ("4242", "temperature")]));
    let (_, _, result) = run(Some("?testNum=matches:9999")).await;
    assert!(table_rows(&result).is_empty());
    let (status, code, result) = run(None).await;
    assert_eq!(status["state"], "Failed");
    assert_eq!(code, StatusCode::CONFLICT);
    assert!(result["error"].as_str().unwrap().contains("testNum"), "{result}");
}

#[tokio::test(flavor = "multi_thread")]
async fn by_name_matches_in_process_execution() {
    let (svc, _) = service(100);
    let conn = fixtures::connection();
    let doc: ontoquery_core::Document = ontoquery_core::Document::parse_unchecked(fixtures::INGEST_NG_JSON).unwrap();
    svc.ingest_document(&doc, &conn, fixtures::SAMPLE_CSV, None).unwrap();
    let chain = ontoquery_core::Document::new(fixtures::chain_nodegroup());
    let direct = svc.execute_document(&chain, &conn, &Default::default()).unwrap().to_json();

    let app = router(svc, None);
    post(&app, "/nodegroups", json!({ "id": "t", "document": document_json(fixtures::chain_nodegroup()) })).await;
    let (_, job) = post_text(&app, "/nodegroups/t/execute", "").await;
    let job = job["jobId"].as_str().unwrap().to_string();
    poll(&app, &job).await;
    let (_, by_name) = get(&app, &format!("/jobs/{job}/results")).await;
    assert_eq!(table_rows(&by_name), table_rows(&direct));
    assert_eq!(table_rows(&by_name).len(), 2);

    let (_, job) = post(&app, "/nodegroups/t/execute", json!({ "queryType": "count" })).await;
    let job = job["jobId"].as_str().unwrap().to_string();
    poll(&app, &job).await;
    let (_, count) = get(&app, &format!("/jobs/{job}/results")).await;
    assert_eq!(count["table"]["results"]["bindings"][0]["count"]["value"], "2", "{count}");
}

#[tokio::test(flavor = "multi_thread")]
async fn error_codes() {
    let (svc, _) = service(100);
    let app = router(svc, None);
    let doc = document_json(fixtures::chain_nodegroup());
    assert_eq!(get(&app, "/nodegroups/missing").await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, Method::DELETE, "/nodegroups/missing", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(post(&app, "/nodegroups/missing/execute", json!({})).await.0, StatusCode::NOT_FOUND);
    assert_eq!(post_text(&app, "/nodegroups/missing/ingest", "a\n1\n").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/jobs/nope/status").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/jobs/nope/results").await.0, StatusCode::NOT_FOUND);

    assert_eq!(post(&app, "/nodegroups", json!({ "id": "a", "document": doc })).await.0, StatusCode::CREATED);
    let (code, body) = post(&app, "/nodegroups", json!({ "id": "a", "document": doc })).await;
    assert_eq!(code, StatusCode::CONFLICT);
    assert!(body["error"].is_string());
    assert_eq!(
        post(&app, "/nodegroups", json!({ "id": "a", "document": doc, "overwrite": true })).await.0,
        StatusCode::CREATED
    );
    assert_eq!(call(&app, Method::DELETE, "/nodegroups/a", None).await.0, StatusCode::NO_CONTENT);
    assert_eq!(get(&app, "/nodegroups/a").await.0, StatusCode::NOT_FOUND);

    assert_eq!(post_text(&app, "/nodegroups", "{not json").await.0, StatusCode::BAD_REQUEST);
    let (code, _) = post(&app, "/query/generate", json!({ "document": doc, "queryType": "nonsense" })).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    // no import spec on the chain document
    assert_eq!(post(&app, "/ingest", json!({ "document": doc, "csv": "a\n" })).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread")]
async fn ingest_reports_bad_rows() {
    let (svc, _) = service(100);
    let app = router(svc, None);
    let csv = fixtures::SAMPLE_CSV.replacen("200.8", "hot", 1);
    let (code, job) = post(&app, "/ingest", json!({ "document": ingest_json(), "csv": csv })).await;
    assert_eq!(code, StatusCode::ACCEPTED);
    let job = job["jobId"].as_str().unwrap().to_string();
    let (_, status) = poll(&app, &job).await;
    assert_eq!(status["state"], "Succeeded");
    let (_, result) = get(&app, &format!("/jobs/{job}/results")).await;
    let report = &result["report"];
    assert_eq!((report["rowsTotal"].as_u64(), report["rowsSucceeded"].as_u64()), (Some(6), Some(5)));
    assert_eq!(report["rowErrors"][0]["row"], 2, "{report}");
}

#[tokio::test(flavor = "multi_thread")]
async fn percent_is_monotone_on_a_long_ingest() {
    let (svc, _) = service(12);
    let app = router(svc, None);
    let csv = replicated_csv(1, 100);
    let (_, job) = post(&app, "/ingest", json!({ "document": ingest_json(), "csv": csv })).await;
    let job = job["jobId"].as_str().unwrap().to_string();
    let (seen, status) = poll(&app, &job).await;
    assert_eq!(status["state"], "Succeeded");
    assert!(seen.windows(2).all(|w| w[0] <= w[1]), "{seen:?}");
    assert!(seen[..seen.len() - 1].iter().all(|&p| p < 100));
    assert_eq!(*seen.last().unwrap(), 100);
    let (_, result) = get(&app, &format!("/jobs/{job}/results")).await;
    assert_eq!(result["report"]["rowsSucceeded"], 600);
}

#[tokio::test(flavor = "multi_thread")]
async fn reads_do_not_mutate() {
    let (svc, store) = service(100);
    let conn = fixtures::connection();
    let doc = ontoquery_core::Document::parse_unchecked(fixtures::INGEST_NG_JSON).unwrap();
    svc.ingest_document(&doc, &conn, fixtures::SAMPLE_CSV, None).unwrap();
    let app = router(svc.clone(), None);
    let chain = document_json(fixtures::chain_nodegroup());
    post(&app, "/nodegroups", json!({ "id": "t", "document": chain })).await;
    let before = store.snapshot();
    for uri in ["/nodegroups", "/nodegroups/t", "/ontology/info", "/nodegroups/none", "/jobs/x/status"] {
        get(&app, uri).await;
    }
    let (code, g) = post(&app, "/query/generate", json!({ "document": chain, "queryType": "delete" })).await;
    assert_eq!(code, StatusCode::BAD_REQUEST, "{g}");
    let (code, g) = post(&app, "/query/generate", json!({ "document": chain })).await;
    assert_eq!(code, StatusCode::OK);
    let direct = svc.generate(&ontoquery_core::Document::new(fixtures::chain_nodegroup()), &conn, &Default::default());
    assert_eq!(g["sparql"].as_str().unwrap(), direct.unwrap().text);
    let (code, s) = post(&app, "/values/suggest", json!({ "id": "t", "targetSparqlId": "?variableName" })).await;
    assert_eq!(code, StatusCode::OK, "{s}");
    assert_eq!(s["values"], json!(["status1", "temperature"]));
    let (code, p) = post(
        &app,
        "/paths/find",
        json!({ "classIri": fixtures::tc("Measurement"), "anchorClassIris": [fixtures::tc("Test")] }),
    )
    .await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(p["paths"][0]["length"], 4);
    assert_eq!(store.snapshot(), before);
}
