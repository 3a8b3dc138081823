//! The sample test-configuration ontology, its CSV data and the
//! nodegroups built over them. Shared by tests, examples and the CLI demo.

use ontoquery_rdf::{parse_turtle, Graph, Iri};

use crate::connection::Connection;
use crate::ingest::{ImportSpec, Lookup, LookupMode, MappingItem, NodeMapping};
use crate::nodegroup::Nodegroup;
use crate::oinfo::OntologyInfo;

pub const TESTCONFIG_TTL: &str = include_str!("../../../fixtures/testconfig.ttl");
pub const SAMPLE_CSV: &str = include_str!("../../../fixtures/sample.csv");
pub const CONNECTION_JSON: &str = include_str!("../../../fixtures/connection.json");
pub const CHAIN_SELECT_SPARQL: &str = include_str!("../../../fixtures/chain-select.rq");
pub const CHAIN_NG_JSON: &str = include_str!("../../../fixtures/chain.ng.json");
pub const INGEST_NG_JSON: &str = include_str!("../../../fixtures/sample-ingest.ng.json");

pub const NAMESPACE: &str = "http://com.ge.research/sample/testconfig#";
pub const DOMAIN_REGEX: &str = r"http://com\.ge\.research/sample/testconfig#";
pub const DATA_BASE: &str = "http://iswc/data#";

/// Full IRI of a local name in the sample namespace.
pub fn tc(local: &str) -> String {
    format!("{NAMESPACE}{local}")
}

pub fn model_graph() -> Graph {
    parse_turtle(TESTCONFIG_TTL, None).expect("sample ontology parses")
}

pub fn ontology() -> OntologyInfo {
    OntologyInfo::load_from_graph(&model_graph(), DOMAIN_REGEX).expect("sample ontology loads")
}

pub fn connection() -> Connection {
    Connection::from_json(CONNECTION_JSON).expect("sample connection parses")
}

/// Test → Layer → Table → MeasurementMap → Measurement returning
/// testNum and variableName.
pub fn chain_nodegroup() -> Nodegroup {
    let o = ontology();
    let mut ng = Nodegroup::new();
    chain(&mut ng, &o, &["Test", "Layer", "Table", "MeasurementMap", "Measurement"]);
    ng.set_property_returned("?Test", &tc("testNum"), true).unwrap();
    ng.set_property_returned("?Measurement", &tc("variableName"), true).unwrap();
    ng
}

const LINKS: [(&str, &str, &str); 5] = [
    ("Test", "dataLayer", "Layer"),
    ("Layer", "hasDataset", "Table"),
    ("Table", "hasMap", "MeasurementMap"),
    ("MeasurementMap", "measurement", "Measurement"),
    ("Measurement", "hasMeasurementValue", "MeasurementValue"),
];

fn chain(ng: &mut Nodegroup, o: &OntologyInfo, classes: &[&str]) {
    for c in classes {
        ng.add_node(&tc(c), o).unwrap();
    }
    for (s, p, t) in LINKS {
        if classes.contains(&s) && classes.contains(&t) {
            ng.add_link(&format!("?{s}"), &tc(p), &format!("?{t}"), o).unwrap();
        }
    }
}

/// The six-class chain with the CSV mapping: Test IRIs from
/// `TEST_<test_number>`, Measurement looked up by units, tag and name,
/// the rest minted per row.
pub fn ingest_template() -> (Nodegroup, ImportSpec) {
    let o = ontology();
    let mut ng = Nodegroup::new();
    chain(
        &mut ng,
        &o,
        &["Test", "Layer", "Table", "MeasurementMap", "Measurement", "MeasurementValue"],
    );
    let mut spec = ImportSpec::new(Iri::new_unchecked(DATA_BASE));
    spec.node_mappings.insert(
        "?Test".into(),
        NodeMapping {
            uri_items: vec![MappingItem::text("TEST_"), MappingItem::column("test_number")],
            lookup: None,
        },
    );
    spec.node_mappings.insert(
        "?Measurement".into(),
        NodeMapping {
            uri_items: Vec::new(),
            lookup: Some(Lookup {
                property_iris: ["hasUnits", "tag", "variableName"]
                    .iter()
                    .map(|p| Iri::new_unchecked(tc(p)))
                    .collect(),
                mode: LookupMode::CreateIfMissing,
            }),
        },
    );
    for (node, prop, col) in [
        ("?Test", "testNum", "test_number"),
        ("?Layer", "code", "layer_code"),
        ("?Measurement", "tag", "meas_tag"),
        ("?Measurement", "variableName", "meas_name"),
        ("?Measurement", "hasUnits", "meas_units"),
        ("?MeasurementValue", "timestamp", "timestamp"),
        ("?MeasurementValue", "hasValue", "value"),
    ] {
        spec.map_property(node, &tc(prop), vec![MappingItem::column(col)]);
    }
    (ng, spec)
}
