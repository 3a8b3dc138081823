//! Random nodegroups and stores over the fixture ontology, and a
//! relational oracle built straight from the nodegroup: one relation per
//! triple pattern, natural joins inside a scope, left outer joins for
//! optional parts.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ontoquery_core::fixtures::{self, tc};
use ontoquery_core::nodegroup::{FilterOp, Nodegroup, OptionalDirection, ValueConstraint};
use ontoquery_core::oinfo::PropertyKind;
use ontoquery_core::sparqlgen::*;
use ontoquery_core::{Connection, OntologyInfo};
use ontoquery_rdf::vocab::{rdf, xsd};
use ontoquery_rdf::{validate_literal, Iri, Term, Triple};
use ontoquery_sparql::{EmbeddedStore, SparqlEndpoint};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Binding = BTreeMap<String, Term>;

pub const CLASSES: [&str; 6] = ["Test", "Layer", "Table", "MeasurementMap", "Measurement", "MeasurementValue"];

pub fn sample_value(rng: &mut ChaCha8Rng, range: &str) -> String {
    match range {
        xsd::INT => rng.random_range(1..5).to_string(),
        xsd::FLOAT => format!("{}.5", rng.random_range(0..4)),
        xsd::DATE_TIME => format!("2017-03-2{}T10:00:00", rng.random_range(1..4)),
        _ => ["a", "b", "ab"].choose(rng).unwrap().to_string(),
    }
}

/// Every resource is typed; links respect domain and range.
pub fn random_store(rng: &mut ChaCha8Rng, o: &OntologyInfo) -> Vec<Triple> {
    let mut out = Vec::new();
    let mut of_class: BTreeMap<&str, Vec<Iri>> = BTreeMap::new();
    for c in CLASSES {
        for i in 0..rng.random_range(0..4) {
            let r = Iri::new_unchecked(format!("http://d#{c}_{i}"));
            out.push(Triple::new(r.clone(), Iri::new_unchecked(rdf::TYPE), Iri::new_unchecked(tc(c))).unwrap());
            of_class.entry(c).or_default().push(r);
        }
    }
    for p in o.properties.values() {
        let domain = p.domain[0].local_name();
        let subjects = of_class.get(domain).cloned().unwrap_or_default();
        match p.kind {
            PropertyKind::Datatype => {
                for s in &subjects {
                    for _ in 0..rng.random_range(0..3) {
                        let lit = validate_literal(&sample_value(rng, p.range[0].as_str()), &p.range[0]).unwrap();
                        out.push(Triple::new(s.clone(), p.iri.clone(), lit).unwrap());
                    }
                }
            }
            PropertyKind::Object => {
                let objects = of_class.get(p.range[0].local_name()).cloned().unwrap_or_default();
                for s in &subjects {
                    for t in &objects {
                        if rng.random_bool(0.4) {
                            out.push(Triple::new(s.clone(), p.iri.clone(), t.clone()).unwrap());
                        }
                    }
                }
            }
        }
    }
    out
}

/// A tree of up to four nodes with random annotations; `None` when the
/// annotations produce an invalid optional structure.
pub fn random_nodegroup(rng: &mut ChaCha8Rng, o: &OntologyInfo) -> Option<Nodegroup> {
    let mut ng = Nodegroup::new();
    ng.add_node(&tc(CLASSES.choose(rng).unwrap()), o).unwrap();
    let links: Vec<(&str, &str, &str)> = vec![
        ("Test", "dataLayer", "Layer"),
        ("Layer", "hasDataset", "Table"),
        ("Table", "hasMap", "MeasurementMap"),
        ("MeasurementMap", "measurement", "Measurement"),
        ("Measurement", "hasMeasurementValue", "MeasurementValue"),
    ];
    for _ in 0..rng.random_range(0..4) {
        let anchor = ng.nodes.choose(rng).unwrap().clone();
        let class = anchor.class_iri.local_name().to_string();
        let options: Vec<_> = links.iter().filter(|(s, _, t)| *s == class || *t == class).collect();
        let &&(s, p, t) = options.choose(rng).unwrap();
        if s == class && (t != class || rng.random_bool(0.5)) {
            let new = ng.add_node(&tc(t), o).unwrap();
            ng.add_link(&anchor.sparql_id, &tc(p), &new, o).unwrap();
        } else {
            let new = ng.add_node(&tc(s), o).unwrap();
            ng.add_link(&new, &tc(p), &anchor.sparql_id, o).unwrap();
        }
    }
    let node_ids: Vec<String> = ng.nodes.iter().map(|n| n.sparql_id.clone()).collect();
    for id in &node_ids {
        if rng.random_bool(0.3) {
            ng.set_node_returned(id, true).unwrap();
        }
        let props: Vec<(String, String)> = ng
            .node(id)
            .unwrap()
            .property_items
            .iter()
            .map(|p| (p.property_iri.as_str().to_string(), p.range.as_str().to_string()))
            .collect();
        for (p, range) in props {
            let roll: f64 = rng.random();
            if roll < 0.25 {
                ng.set_property_returned(id, &p, true).unwrap();
            }
            if rng.random_bool(0.15) {
                let vals = (0..rng.random_range(1..3)).map(|_| sample_value(rng, &range)).collect();
                ng.add_constraint(id, &p, ValueConstraint::Values(vals), None).unwrap();
            }
            if rng.random_bool(0.15) {
                let c = match range.as_str() {
                    xsd::INT | xsd::FLOAT => ValueConstraint::Filter {
                        op: *[FilterOp::Eq, FilterOp::Ne, FilterOp::Gt, FilterOp::Ge, FilterOp::Lt, FilterOp::Le]
                            .choose(rng)
                            .unwrap(),
                        operand: sample_value(rng, &range),
                    },
                    xsd::STRING => ValueConstraint::Filter {
                        op: FilterOp::Regex,
                        operand: ["^a", "b$", "ab"].choose(rng).unwrap().to_string(),
                    },
                    _ => continue,
                };
                ng.add_constraint(id, &p, c, None).unwrap();
            }
            let used = ng.node(id).unwrap().property(&p).unwrap().sparql_id.is_some();
            if used && rng.random_bool(0.3) {
                ng.set_property_optional(id, &p, true).unwrap();
            }
        }
    }
    for l in ng.links() {
        let roll: f64 = rng.random();
        let dir = if roll < 0.2 {
            OptionalDirection::TargetIsOptional
        } else if roll < 0.3 {
            OptionalDirection::SourceIsOptional
        } else {
            continue;
        };
        ng.nodes[l.source].node_items[l.item].optional_direction = dir;
    }
    if ng.returned_ids().is_empty() {
        ng.nodes[0].is_returned = true;
    }
    ng.validate(o).is_empty().then_some(ng)
}

// ---- oracle -------------------------------------------------------------

pub fn compatible(a: &Binding, b: &Binding) -> bool {
    a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v))
}

pub fn join(a: &[Binding], b: &[Binding]) -> Vec<Binding> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            if compatible(x, y) {
                let mut m = x.clone();
                m.extend(y.clone());
                out.push(m);
            }
        }
    }
    out
}

pub fn left_join(a: &[Binding], b: &[Binding]) -> Vec<Binding> {
    let mut out = Vec::new();
    for x in a {
        let ext: Vec<Binding> = join(std::slice::from_ref(x), b);
        if ext.is_empty() {
            out.push(x.clone());
        } else {
            out.extend(ext);
        }
    }
    out
}

pub enum Slot {
    Var(String),
    Fixed(Term),
}

pub fn pattern(data: &[Triple], s: &str, p: &str, o: Slot) -> Vec<Binding> {
    data.iter()
        .filter(|t| t.predicate().as_str() == p)
        .filter_map(|t| {
            let mut b = Binding::new();
            b.insert(s.to_string(), t.subject().clone());
            match &o {
                Slot::Var(v) => {
                    if v == s && t.object() != t.subject() {
                        return None;
                    }
                    b.insert(v.clone(), t.object().clone());
                }
                Slot::Fixed(term) if term != t.object() => return None,
                Slot::Fixed(_) => {}
            }
            Some(b)
        })
        .collect()
}

pub fn number(t: &Term) -> Option<f64> {
    t.as_literal().and_then(|l| l.lexical().parse().ok())
}

pub fn holds(value: &Term, c: &ValueConstraint, range: &Iri) -> bool {
    match c {
        ValueConstraint::Values(vals) => vals
            .iter()
            .any(|v| Term::Literal(validate_literal(v, range).unwrap()) == *value),
        ValueConstraint::Filter { op: FilterOp::Regex, operand } => {
            regex::Regex::new(operand).unwrap().is_match(value.str_value())
        }
        ValueConstraint::Filter { op, operand } => {
            let (Some(x), Ok(y)) = (number(value), operand.parse::<f64>()) else { return false };
            match op {
                FilterOp::Eq => x == y,
                FilterOp::Ne => x != y,
                FilterOp::Gt => x > y,
                FilterOp::Ge => x >= y,
                FilterOp::Lt => x < y,
                FilterOp::Le => x <= y,
                FilterOp::Regex => unreachable!(),
            }
        }
    }
}

pub fn item_relation(data: &[Triple], node: &str, item: &ontoquery_core::nodegroup::PropertyItem) -> Vec<Binding> {
    let id = item.sparql_id.clone().unwrap();
    pattern(data, node, item.property_iri.as_str(), Slot::Var(id.clone()))
        .into_iter()
        .filter(|b| item.constraints.iter().all(|c| holds(&b[&id], c, &item.range)))
        .collect()
}

pub struct Oracle<'a> {
    ng: &'a Nodegroup,
    data: &'a [Triple],
    /// innermost optional link (index into `links`) per node
    scope: Vec<Option<usize>>,
    links: Vec<ontoquery_core::nodegroup::Link>,
}

impl<'a> Oracle<'a> {
    pub fn new(ng: &'a Nodegroup, data: &'a [Triple]) -> Self {
        let links = ng.links();
        let mut scope = vec![None; ng.nodes.len()];
        let mut size = vec![usize::MAX; ng.nodes.len()];
        for (li, l) in links.iter().enumerate() {
            let far = match ng.link_item(*l).optional_direction {
                OptionalDirection::None => continue,
                OptionalDirection::TargetIsOptional => l.target,
                OptionalDirection::SourceIsOptional => l.source,
            };
            // nodes reachable from the far end without the optional link
            let mut side = BTreeSet::from([far]);
            let mut stack = vec![far];
            while let Some(c) = stack.pop() {
                for (lj, m) in links.iter().enumerate() {
                    if lj == li {
                        continue;
                    }
                    for (a, b) in [(m.source, m.target), (m.target, m.source)] {
                        if a == c && side.insert(b) {
                            stack.push(b);
                        }
                    }
                }
            }
            for &n in &side {
                if side.len() < size[n] {
                    size[n] = side.len();
                    scope[n] = Some(li);
                }
            }
        }
        Oracle { ng, data, scope, links }
    }

    fn var(&self, i: usize) -> String {
        self.ng.nodes[i].sparql_id.clone()
    }

    fn link_relation(&self, li: usize) -> Vec<Binding> {
        let l = self.links[li];
        pattern(
            self.data,
            &self.var(l.source),
            self.ng.link_item(l).predicate_iri.as_str(),
            Slot::Var(self.var(l.target)),
        )
    }

    pub fn eval(&self, scope: Option<usize>) -> Vec<Binding> {
        let mut rel = vec![Binding::new()];
        if let Some(li) = scope {
            rel = join(&rel, &self.link_relation(li));
        }
        let own: Vec<usize> = (0..self.ng.nodes.len()).filter(|&i| self.scope[i] == scope).collect();
        let mut optional_parts = Vec::new();
        for &i in &own {
            let node = &self.ng.nodes[i];
            rel = join(
                &rel,
                &pattern(self.data, &node.sparql_id, rdf::TYPE, Slot::Fixed(Term::Iri(node.class_iri.clone()))),
            );
            for item in node.used_properties() {
                let r = item_relation(self.data, &node.sparql_id, item);
                if item.is_optional {
                    optional_parts.push(r);
                } else {
                    rel = join(&rel, &r);
                }
            }
        }
        for (li, l) in self.links.iter().enumerate() {
            let item = self.ng.link_item(*l);
            let near = match item.optional_direction {
                OptionalDirection::None => {
                    if own.contains(&l.source) {
                        rel = join(&rel, &self.link_relation(li));
                    }
                    continue;
                }
                OptionalDirection::TargetIsOptional => l.source,
                OptionalDirection::SourceIsOptional => l.target,
            };
            if own.contains(&near) {
                optional_parts.push(self.eval(Some(li)));
            }
        }
        for part in optional_parts {
            rel = left_join(&rel, &part);
        }
        rel
    }

    pub fn rows(&self, returned: &[String]) -> BTreeSet<Vec<Option<Term>>> {
        self.eval(None)
            .iter()
            .map(|b| returned.iter().map(|id| b.get(id).cloned()).collect())
            .collect()
    }
}

pub fn store_of(c: &Connection, data: &[Triple]) -> EmbeddedStore {
    let store = EmbeddedStore::new();
    store.insert_triples(&c.data_graphs()[0], data.iter().cloned());
    store.load_graph(&c.model_graphs()[0], &fixtures::model_graph());
    store
}

pub fn store_rows(store: &EmbeddedStore, text: &str, returned: &[String]) -> BTreeSet<Vec<Option<Term>>> {
    let table = store.query(text).unwrap().into_table().unwrap();
    table
        .rows
        .iter()
        .map(|r| returned.iter().map(|id| r[table.column_index(id).unwrap()].clone()).collect())
        .collect()
}

pub fn case(seed: u64) -> Option<(OntologyInfo, Connection, Nodegroup, Vec<Triple>)> {
    let o = fixtures::ontology();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ng = random_nodegroup(&mut rng, &o)?;
    let data = random_store(&mut rng, &o);
    Some((o, fixtures::connection(), ng, data))
}


/// Select rows, count and ask for one random case against the oracle.
/// `Ok(false)` when the seed yields no valid nodegroup.
pub fn check_case(seed: u64) -> Result<bool, String> {
    let Some((o, c, ng, data)) = case(seed) else { return Ok(false) };
    let q = generate_select(&ng, &c, &o).map_err(|e| e.to_string())?;
    let store = store_of(&c, &data);
    let got = store_rows(&store, &q.text, &q.returned_ids);
    let oracle = Oracle::new(&ng, &data);
    let want = oracle.rows(&q.returned_ids);
    if got != want {
        return Err(format!("seed {seed}: select differs\n{}\ngot {got:?}\nwant {want:?}", q.text));
    }
    let count_text = generate_count(&ng, &c, &o).map_err(|e| e.to_string())?.text;
    let count = store
        .query(&count_text)
        .and_then(|r| r.into_table())
        .map_err(|e| e.to_string())?
        .count_value();
    if count != Some(got.len() as u64) {
        return Err(format!("seed {seed}: count {count:?} but {} rows", got.len()));
    }
    let ask_text = generate_ask(&ng, &c, &o).map_err(|e| e.to_string())?.text;
    let ask = store.query(&ask_text).and_then(|r| r.as_bool()).map_err(|e| e.to_string())?;
    if ask != !oracle.eval(None).is_empty() {
        return Err(format!("seed {seed}: ask {ask} disagrees"));
    }
    Ok(true)
}
