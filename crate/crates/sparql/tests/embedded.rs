use std::collections::BTreeSet;
use std::sync::Arc;

use ontoquery_rdf::{Iri, Term};
use ontoquery_sparql::{parse_query, EmbeddedStore, EvalConfig, Error, QueryResult, SparqlEndpoint};

const TC: &str = "http://com.ge.research/sample/testconfig#";
const MODEL: &str = include_str!("../../../fixtures/testconfig.ttl");

/// Sample CSV rows as instance data, with two measurements under one map.
const DATA: &str = r#"
@prefix tc: <http://com.ge.research/sample/testconfig#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix d: <http://iswc/data#> .
d:t a tc:Test ; tc:testNum "4242"^^xsd:int ; tc:dataLayer d:l .
d:l a tc:Layer ; tc:code "layer1" ; tc:hasDataset d:tab .
d:tab a tc:Table ; tc:hasMap d:map .
d:map a tc:MeasurementMap ; tc:measurement d:temp, d:st1 .
d:temp a tc:Measurement ; tc:tag "temp" ; tc:variableName "temperature" ; tc:hasUnits "F" ;
    tc:hasMeasurementValue d:v1, d:v2, d:v3 .
d:st1 a tc:Measurement ; tc:tag "st1" ; tc:variableName "status1" ; tc:hasUnits "%" ;
    tc:hasMeasurementValue d:v4, d:v5, d:v6 .
d:v1 a tc:MeasurementValue ; tc:hasValue "200.5"^^xsd:float ; tc:timestamp "2017-03-23T10:00:00"^^xsd:dateTime .
d:v2 a tc:MeasurementValue ; tc:hasValue "200.8"^^xsd:float ; tc:timestamp "2017-03-23T10:03:16"^^xsd:dateTime .
d:v3 a tc:MeasurementValue ; tc:hasValue "200.9"^^xsd:float ; tc:timestamp "2017-03-23T10:03:17"^^xsd:dateTime .
d:v4 a tc:MeasurementValue ; tc:hasValue "0.01"^^xsd:float ; tc:timestamp "2017-03-23T10:00:00"^^xsd:dateTime .
d:v5 a tc:MeasurementValue ; tc:hasValue "0.05"^^xsd:float ; tc:timestamp "2017-03-23T10:03:16"^^xsd:dateTime .
d:v6 a tc:MeasurementValue ; tc:hasValue "0.72"^^xsd:float ; tc:timestamp "2017-03-23T10:03:17"^^xsd:dateTime .
"#;

const CHAIN_SELECT: &str = r#"prefix XMLSchema:<http://www.w3.org/2001/XMLSchema#>
prefix testconfig:<http://com.ge.research/sample/testconfig#>
select distinct ?testNum ?variableName
  FROM <http://iswc/data>
  FROM <http://iswc/model>
where {
  ?Test a testconfig:Test .
  ?Test testconfig:testNum ?testNum .
  ?Test testconfig:dataLayer ?Layer .
  ?Layer testconfig:hasDataset ?Table .
  ?Table testconfig:hasMap ?MeasurementMap .

  ?MeasurementMap testconfig:measurement ?Measurement .
  ?Measurement testconfig:variableName ?variableName .
}"#;

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn loaded() -> EmbeddedStore {
    let store = EmbeddedStore::new();
    store.load_turtle(&iri("http://iswc/model"), MODEL).unwrap();
    store.load_turtle(&iri("http://iswc/data"), DATA).unwrap();
    store
}

fn rows(store: &EmbeddedStore, q: &str) -> Vec<Vec<String>> {
    let table = store.query(q).unwrap().into_table().unwrap();
    table
        .rows
        .iter()
        .map(|r| r.iter().map(|c| c.as_ref().map_or("UNBOUND".to_string(), |t| t.str_value().to_string())).collect())
        .collect()
}

#[test]
fn chain_over_sample_returns_two_rows() {
    let store = loaded();
    let mut got = rows(&store, CHAIN_SELECT);
    got.sort();
    assert_eq!(got, vec![vec!["4242", "status1"], vec!["4242", "temperature"]]);
}

#[test]
fn empty_store_yields_no_rows() {
    let store = EmbeddedStore::new();
    assert!(rows(&store, CHAIN_SELECT).is_empty());
    assert!(!store.query("ASK { ?s ?p ?o }").unwrap().as_bool().unwrap());
}

#[test]
fn order_by_desc_limit_picks_maximum() {
    let store = loaded();
    let temps = rows(
        &store,
        &format!("SELECT ?v WHERE {{ ?m <{TC}variableName> \"temperature\" . ?m <{TC}hasMeasurementValue> ?x . ?x <{TC}hasValue> ?v }}"),
    );
    let max = temps.iter().map(|r| r[0].parse::<f64>().unwrap()).fold(f64::MIN, f64::max);
    let top = rows(
        &store,
        &format!("SELECT ?v WHERE {{ ?m <{TC}variableName> \"temperature\" . ?m <{TC}hasMeasurementValue> ?x . ?x <{TC}hasValue> ?v }} ORDER BY DESC(?v) LIMIT 1"),
    );
    assert_eq!(top.len(), 1);
    assert_eq!(top[0][0].parse::<f64>().unwrap(), max);
    assert_eq!(top[0][0], "200.9");
}

#[test]
fn datetime_and_numeric_filters() {
    let store = loaded();
    let q = format!(
        "PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
         SELECT ?x WHERE {{ ?x <{TC}timestamp> ?t . ?x <{TC}hasValue> ?v .
           FILTER(?t > \"2017-03-23T10:03:00\"^^xsd:dateTime && ?v < 100) }}"
    );
    let mut got: Vec<String> = rows(&store, &q).into_iter().map(|r| r[0].clone()).collect();
    got.sort();
    assert_eq!(got, vec!["http://iswc/data#v5", "http://iswc/data#v6"]);
    let q = format!("SELECT ?m WHERE {{ ?m <{TC}tag> ?tag . FILTER regex(str(?tag), \"^TE\", \"i\") }}");
    assert_eq!(rows(&store, &q), vec![vec!["http://iswc/data#temp"]]);
}

#[test]
fn values_optional_count_ask_construct() {
    let store = loaded();
    let q = format!("SELECT ?m ?d WHERE {{ ?m <{TC}tag> ?t . VALUES ?t {{ \"temp\" \"nope\" }} OPTIONAL {{ ?m <{TC}hasDescription> ?d }} }}");
    assert_eq!(rows(&store, &q), vec![vec!["http://iswc/data#temp", "UNBOUND"]]);

    let count = format!("SELECT (COUNT(*) AS ?count) WHERE {{ SELECT DISTINCT ?v WHERE {{ ?x <{TC}hasValue> ?v }} }}");
    let t = store.query(&count).unwrap().into_table().unwrap();
    assert_eq!(t.columns, vec!["count"]);
    assert_eq!(t.count_value(), Some(6));
    let count_limited = format!("SELECT (COUNT(*) AS ?count) WHERE {{ SELECT DISTINCT ?v WHERE {{ ?x <{TC}hasValue> ?v }} LIMIT 4 }}");
    assert_eq!(store.query(&count_limited).unwrap().into_table().unwrap().count_value(), Some(4));

    assert!(store.query(&format!("ASK FROM <http://iswc/data> {{ ?x a <{TC}Test> }}")).unwrap().as_bool().unwrap());
    assert!(!store.query(&format!("ASK FROM <http://iswc/model> {{ ?x a <{TC}Test> }}")).unwrap().as_bool().unwrap());

    let g = store
        .query(&format!(
            "CONSTRUCT {{ ?m <http://x/desc> ?d . ?m <http://x/tag> ?t }} WHERE {{ ?m <{TC}tag> ?t OPTIONAL {{ ?m <{TC}hasDescription> ?d }} }}"
        ))
        .unwrap()
        .into_graph()
        .unwrap();
    assert_eq!(g.len(), 2);
}

#[test]
fn insert_data_is_idempotent() {
    let store = EmbeddedStore::new();
    let u = "INSERT DATA { GRAPH <http://g> { <http://a> <http://p> \"v\" } }";
    store.update(u).unwrap();
    let before = store.len();
    store.update(u).unwrap();
    assert_eq!(store.len(), before);
    assert_eq!(before, 1);
    store.update("INSERT DATA { <http://a> <http://p> \"w\" }").unwrap();
    assert_eq!(store.graph_len(&iri(ontoquery_sparql::DEFAULT_GRAPH)), 1);
}

#[test]
fn delete_with_no_match_leaves_store_unchanged() {
    let store = loaded();
    let before = store.snapshot();
    store
        .update(&format!("WITH <http://iswc/data> DELETE {{ ?x ?p ?o }} WHERE {{ ?x a <{TC}Nothing> . ?x ?p ?o }}"))
        .unwrap();
    assert_eq!(store.snapshot(), before);
}

#[test]
fn full_delete_of_measurements_matches_set_difference() {
    let store = loaded();
    let data = iri("http://iswc/data");
    let before = store.graph(&data);
    let meas: BTreeSet<Term> = before
        .iter()
        .filter(|t| t.predicate().as_str().ends_with("#type") && t.object().str_value() == format!("{TC}Measurement"))
        .map(|t| t.subject().clone())
        .collect();
    assert_eq!(meas.len(), 2);
    let expected: BTreeSet<_> = before
        .iter()
        .filter(|t| !meas.contains(t.subject()) && !meas.contains(t.object()))
        .cloned()
        .collect();
    store
        .update(&format!(
            "WITH <http://iswc/data> DELETE {{ ?m ?p0 ?o0 . ?s1 ?p1 ?m }} WHERE {{ ?m a <{TC}Measurement> . OPTIONAL {{ ?m ?p0 ?o0 }} OPTIONAL {{ ?s1 ?p1 ?m }} }}"
        ))
        .unwrap();
    let after: BTreeSet<_> = store.graph(&data).iter().cloned().collect();
    assert_eq!(after, expected);
    assert!(rows(&store, CHAIN_SELECT).is_empty());
}

#[test]
fn failing_update_leaves_store_identical() {
    let store = EmbeddedStore::with_config(EvalConfig { solution_cap: 10 });
    store.load_turtle(&iri("http://iswc/data"), DATA).unwrap();
    let before = store.snapshot();
    let err = store
        .update("WITH <http://iswc/data> DELETE { ?s ?p ?o } WHERE { ?s ?p ?o }")
        .unwrap_err();
    assert_eq!(err, Error::SolutionCap(10));
    assert_eq!(store.snapshot(), before);
}

#[test]
fn query_and_update_forms_are_not_interchangeable() {
    let store = loaded();
    assert_eq!(store.query("INSERT DATA { <http://a> <http://p> <http://b> }").unwrap_err(), Error::NotAQuery);
    assert_eq!(store.update("ASK { ?s ?p ?o }").unwrap_err(), Error::NotAnUpdate);
}

#[test]
fn visited_counts_depend_on_clause_order() {
    let store = loaded();
    let forward = format!("SELECT ?v WHERE {{ ?m <{TC}tag> \"temp\" . ?m <{TC}hasMeasurementValue> ?x . ?x <{TC}hasValue> ?v }}");
    let backward = format!("SELECT ?v WHERE {{ ?x <{TC}hasValue> ?v . ?m <{TC}hasMeasurementValue> ?x . ?m <{TC}tag> \"temp\" }}");
    let (a, sa) = store.query_with_stats(&forward).unwrap();
    let (b, sb) = store.query_with_stats(&backward).unwrap();
    let mut ra = a.into_table().unwrap().rows;
    let mut rb = b.into_table().unwrap().rows;
    ra.sort();
    rb.sort();
    assert_eq!(ra, rb);
    assert!(sa.visited < sb.visited, "{} vs {}", sa.visited, sb.visited);
}

#[test]
fn concurrent_readers() {
    let store = Arc::new(loaded());
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let s = Arc::clone(&store);
            std::thread::spawn(move || s.query(CHAIN_SELECT).unwrap().into_table().unwrap().len())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), 2);
    }
}

#[test]
fn results_are_solutions_for_select() {
    let store = loaded();
    assert!(matches!(store.query(CHAIN_SELECT).unwrap(), QueryResult::Solutions(_)));
    assert_eq!(parse_query(CHAIN_SELECT).unwrap().to_string(), parse_query(&parse_query(CHAIN_SELECT).unwrap().to_string()).unwrap().to_string());
}
