//! Random nodegroups grown over the fixture ontology by pathfinding.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ontoquery_core::fixtures::tc;
use ontoquery_core::nodegroup::{DeleteMode, Nodegroup, OptionalDirection, ValueConstraint};
use ontoquery_core::pathfind::{find_paths, EdgeIndex, PathConfig};
use ontoquery_core::OntologyInfo;
use ontoquery_rdf::Iri;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLASSES: [&str; 6] = ["Test", "Layer", "Table", "MeasurementMap", "Measurement", "MeasurementValue"];

/// A random first node, then nodes attached by pathfinding from whatever is
/// already present.
pub fn grow(seed: u64, o: &OntologyInfo, index: &EdgeIndex) -> Nodegroup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ng = Nodegroup::new();
    for _ in 0..rng.random_range(1..8) {
        let class = tc(CLASSES.choose(&mut rng).unwrap());
        if ng.is_empty() {
            ng.add_node(&class, o).unwrap();
            continue;
        }
        let anchors: Vec<Iri> = ng.nodes.iter().map(|n| n.class_iri.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let paths = find_paths(index, &Iri::new(class).unwrap(), &anchors, &PathConfig::default()).unwrap();
        let Some(path) = paths.choose(&mut rng) else { continue };
        let anchor_class = path.anchor_class();
        let candidates: Vec<String> = ng
            .nodes
            .iter()
            .filter(|n| n.class_iri == anchor_class)
            .map(|n| n.sparql_id.clone())
            .collect();
        let anchor = candidates.choose(&mut rng).cloned();
        ng.add_node_via_path(path, anchor.as_deref(), o).unwrap();
    }
    ng
}

pub fn ids(ng: &Nodegroup) -> Vec<String> {
    let mut out: Vec<String> = ng.nodes.iter().map(|n| n.sparql_id.clone()).collect();
    for n in &ng.nodes {
        out.extend(n.property_items.iter().filter_map(|p| p.sparql_id.clone()));
    }
    out
}

pub fn annotate(seed: u64, ng: &mut Nodegroup) {
    let mut rng = ChaCha8Rng::seed_from_u64(!seed);
    let node_ids: Vec<String> = ng.nodes.iter().map(|n| n.sparql_id.clone()).collect();
    for id in &node_ids {
        ng.set_node_returned(id, rng.random_bool(0.5)).unwrap();
        if rng.random_bool(0.2) {
            ng.mark_node_for_deletion(id, Some(DeleteMode::TypeOnly)).unwrap();
        }
        let props: Vec<String> = ng.node(id).unwrap().property_items.iter().map(|p| p.property_iri.as_str().to_string()).collect();
        for p in props {
            if rng.random_bool(0.3) {
                ng.set_property_returned(id, &p, true).unwrap();
            }
            if rng.random_bool(0.2) {
                ng.set_property_optional(id, &p, true).unwrap();
            }
            if rng.random_bool(0.1) {
                ng.set_runtime_constrained(id, &p, true).unwrap();
            }
            if rng.random_bool(0.2) && p.ends_with("testNum") {
                ng.add_constraint(id, &p, ValueConstraint::Values(vec!["7".into()]), None).unwrap();
            }
        }
    }
    for l in ng.links() {
        if rng.random_bool(0.3) {
            let (s, t) = (ng.nodes[l.source].sparql_id.clone(), ng.nodes[l.target].sparql_id.clone());
            let pred = ng.link_item(l).predicate_iri.as_str().to_string();
            ng.set_link_optional(&s, &pred, &t, OptionalDirection::TargetIsOptional).unwrap();
        }
    }
    let returned = ng.returned_ids();
    if let Some(first) = returned.first() {
        ng.add_order_by(first, rng.random_bool(0.5)).unwrap();
    }
    ng.set_limit(Some(rng.random_range(1..100)));
}

/// Grown and annotated nodegroup for `seed`.
pub fn random_annotated(seed: u64, o: &OntologyInfo, index: &EdgeIndex) -> Nodegroup {
    let mut ng = grow(seed, o, index);
    annotate(seed, &mut ng);
    ng
}
