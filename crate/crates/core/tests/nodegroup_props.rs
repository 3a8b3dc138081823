#[path = "support/ng_gen.rs"]
mod ng_gen;

use std::collections::BTreeSet;

use ng_gen::*;
use ontoquery_core::fixtures;
use ontoquery_core::nodegroup::{Document, Nodegroup};
use ontoquery_core::pathfind::EdgeIndex;
use proptest::prelude::*;

fn topology(ng: &Nodegroup) -> Vec<(String, String, String)> {
    ng.links()
        .iter()
        .map(|l| {
            (
                ng.nodes[l.source].sparql_id.clone(),
                ng.link_item(*l).predicate_iri.as_str().to_string(),
                ng.nodes[l.target].sparql_id.clone(),
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ids_stay_unique_and_well_formed(seed in any::<u64>()) {
        let o = fixtures::ontology();
        let index = EdgeIndex::build(&o);
        let mut ng = grow(seed, &o, &index);
        annotate(seed, &mut ng);
        let all = ids(&ng);
        let distinct: BTreeSet<&String> = all.iter().collect();
        prop_assert_eq!(distinct.len(), all.len(), "{:?}", all);
        for id in &all {
            prop_assert!(id.starts_with('?') && id.len() > 1);
            prop_assert!(id[1..].chars().all(|c| c.is_ascii_alphanumeric() || c == '_'), "{}", id);
        }
    }

    #[test]
    fn grown_nodegroups_are_connected_and_valid(seed in any::<u64>()) {
        let o = fixtures::ontology();
        let index = EdgeIndex::build(&o);
        let ng = grow(seed, &o, &index);
        prop_assert!(ng.validate(&o).is_empty(), "{:?}", ng.validate(&o));
        for l in ng.links() {
            let item = ng.link_item(l);
            prop_assert!(Nodegroup::link_allowed(
                &o,
                ng.nodes[l.source].class_iri.as_str(),
                item.predicate_iri.as_str(),
                ng.nodes[l.target].class_iri.as_str()
            ).is_ok());
        }
    }

    #[test]
    fn interchange_round_trips(seed in any::<u64>()) {
        let o = fixtures::ontology();
        let index = EdgeIndex::build(&o);
        let mut ng = grow(seed, &o, &index);
        annotate(seed, &mut ng);
        let text = ng.to_interchange();
        let back = Nodegroup::from_interchange(&text, &o).unwrap();
        prop_assert_eq!(&back, &ng);
        prop_assert_eq!(back.to_interchange(), text);
        let doc = Document::parse_unchecked(&Document::new(ng.clone()).to_json()).unwrap();
        prop_assert_eq!(doc.nodegroup, ng);
    }

    #[test]
    fn annotations_leave_topology_alone(seed in any::<u64>()) {
        let o = fixtures::ontology();
        let index = EdgeIndex::build(&o);
        let mut ng = grow(seed, &o, &index);
        let before = (topology(&ng), ng.nodes.iter().map(|n| (n.sparql_id.clone(), n.class_iri.clone())).collect::<Vec<_>>());
        annotate(seed, &mut ng);
        let after = (topology(&ng), ng.nodes.iter().map(|n| (n.sparql_id.clone(), n.class_iri.clone())).collect::<Vec<_>>());
        prop_assert_eq!(before, after);
    }
}

#[test]
fn paths_are_actually_used() {
    let o = fixtures::ontology();
    let index = EdgeIndex::build(&o);
    let linked = (0..100u64).filter(|s| !grow(*s, &o, &index).links().is_empty()).count();
    assert!(linked > 50, "{linked}");
}
