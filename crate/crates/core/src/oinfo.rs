//! Ontology information cache.
//!
//! Everything is read from a [`Graph`] holding OWL-subset declarations.
//! Loading from a SPARQL endpoint fetches exactly those declarations into
//! a local graph first, so both entry points share one builder.

use std::collections::{BTreeMap, BTreeSet};

use ontoquery_rdf::vocab::{owl, rdf, rdfs};
use ontoquery_rdf::{Graph, Iri, Term, Triple};
use ontoquery_sparql::SparqlEndpoint;
use regex::Regex;
use serde::Serialize;

use crate::{Connection, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum PropertyKind {
    Datatype,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OntologyClass {
    pub iri: Iri,
    /// Direct superclasses.
    pub superclasses: Vec<Iri>,
    /// Properties whose domain names this class directly.
    pub datatype_properties: Vec<Iri>,
    pub object_properties: Vec<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OntologyProperty {
    pub iri: Iri,
    pub domain: Vec<Iri>,
    pub range: Vec<Iri>,
    pub kind: PropertyKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum HitKind {
    Class,
    Property,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchHit {
    pub iri: Iri,
    pub kind: HitKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OntologyInfo {
    pub classes: BTreeMap<Iri, OntologyClass>,
    pub properties: BTreeMap<Iri, OntologyProperty>,
    /// Enumeration class → permitted instances, in list order.
    pub enumerations: BTreeMap<Iri, Vec<Iri>>,
    /// (child, parent)
    pub subclass_edges: BTreeSet<(Iri, Iri)>,
}

impl OntologyInfo {
    pub fn load_from_graph(graph: &Graph, domain_regex: &str) -> Result<Self> {
        let domain = Regex::new(domain_regex).map_err(|e| Error::regex(domain_regex, e))?;
        build(graph, &domain)
    }

    /// Fetches the ontology declarations from the connection's model graphs.
    pub fn load_from_endpoints(conn: &Connection, endpoint: &dyn SparqlEndpoint) -> Result<Self> {
        let domain = conn.domain()?;
        let from: String = conn.model_graphs().iter().map(|g| format!("FROM <{}> ", g.as_str())).collect();
        let pairs = [
            (format!("SELECT DISTINCT ?s ?o {from}WHERE {{ ?s a ?o . VALUES ?o {{ <{}> <{}> <{}> }} }}", owl::CLASS, owl::OBJECT_PROPERTY, owl::DATATYPE_PROPERTY), rdf::TYPE),
            (format!("SELECT DISTINCT ?s ?o {from}WHERE {{ ?s <{}> ?o }}", rdfs::SUB_CLASS_OF), rdfs::SUB_CLASS_OF),
            (format!("SELECT DISTINCT ?s ?o {from}WHERE {{ ?s <{}> ?o }}", rdfs::DOMAIN), rdfs::DOMAIN),
            (format!("SELECT DISTINCT ?s ?o {from}WHERE {{ ?s <{}> ?o }}", rdfs::RANGE), rdfs::RANGE),
            (format!("SELECT DISTINCT ?s ?o {from}WHERE {{ ?s <{}> ?o }}", owl::ONE_OF), owl::ONE_OF),
            (format!("SELECT DISTINCT ?s ?o {from}WHERE {{ ?s <{}> ?o }}", owl::EQUIVALENT_CLASS), owl::EQUIVALENT_CLASS),
            (format!("SELECT DISTINCT ?s ?o {from}WHERE {{ ?s <{}> ?o }}", rdf::FIRST), rdf::FIRST),
            (format!("SELECT DISTINCT ?s ?o {from}WHERE {{ ?s <{}> ?o }}", rdf::REST), rdf::REST),
        ];
        let mut graph = Graph::new();
        for (query, predicate) in pairs {
            let table = endpoint.query(&query)?.into_table()?;
            let predicate = Iri::new_unchecked(predicate);
            for row in &table.rows {
                let (Some(Some(s)), Some(Some(o))) = (row.first(), row.get(1)) else { continue };
                if let Ok(t) = Triple::new(s.clone(), predicate.clone(), o.clone()) {
                    graph.insert(t);
                }
            }
        }
        build(&graph, &domain)
    }

    pub fn class(&self, iri: &str) -> Option<&OntologyClass> {
        self.classes.get(&Iri::new_unchecked(iri))
    }

    pub fn property(&self, iri: &str) -> Option<&OntologyProperty> {
        self.properties.get(&Iri::new_unchecked(iri))
    }

    pub fn contains_class(&self, iri: &str) -> bool {
        self.class(iri).is_some()
    }

    fn known(&self, c: &str) -> Result<&OntologyClass> {
        self.class(c).ok_or_else(|| Error::UnknownClass(c.to_string()))
    }

    /// Subclasses of `c`, excluding `c`, sorted.
    pub fn subclasses_of(&self, c: &str, transitive: bool) -> Result<Vec<Iri>> {
        self.known(c)?;
        Ok(self.walk(c, transitive, |(child, parent)| (parent, child)))
    }

    /// Superclasses of `c`, excluding `c`, sorted.
    pub fn superclasses_of(&self, c: &str, transitive: bool) -> Result<Vec<Iri>> {
        self.known(c)?;
        Ok(self.walk(c, transitive, |(child, parent)| (child, parent)))
    }

    fn walk<'a>(&'a self, start: &str, transitive: bool, orient: impl Fn((&'a Iri, &'a Iri)) -> (&'a Iri, &'a Iri)) -> Vec<Iri> {
        let mut found = BTreeSet::new();
        let mut frontier = vec![start.to_string()];
        while let Some(cur) = frontier.pop() {
            for (c, p) in &self.subclass_edges {
                let (from, to) = orient((c, p));
                if from.as_str() == cur && to.as_str() != start && found.insert(to.clone()) && transitive {
                    frontier.push(to.as_str().to_string());
                }
            }
        }
        found.into_iter().collect()
    }

    /// True when `c` equals `ancestor` or is a transitive subclass of it.
    pub fn is_a(&self, c: &str, ancestor: &str) -> bool {
        c == ancestor || self.superclasses_of(c, true).is_ok_and(|s| s.iter().any(|x| x.as_str() == ancestor))
    }

    /// Datatype properties, then object properties, each sorted by IRI.
    pub fn properties_of(&self, c: &str, inherited: bool) -> Result<Vec<&OntologyProperty>> {
        self.known(c)?;
        let mut owners = vec![Iri::new_unchecked(c)];
        if inherited {
            owners.extend(self.superclasses_of(c, true)?);
        }
        let mut props: Vec<&OntologyProperty> = self
            .properties
            .values()
            .filter(|p| p.domain.iter().any(|d| owners.contains(d)))
            .collect();
        props.sort_by(|a, b| a.kind.cmp(&b.kind).then_with(|| a.iri.cmp(&b.iri)));
        Ok(props)
    }

    /// Case-insensitive substring search over local names and IRIs.
    pub fn search(&self, needle: &str) -> Vec<SearchHit> {
        let needle = needle.to_lowercase();
        let hit = |iri: &Iri| iri.as_str().to_lowercase().contains(&needle) || iri.local_name().to_lowercase().contains(&needle);
        let classes = self.classes.keys().filter(|i| hit(i)).map(|iri| SearchHit {
            iri: iri.clone(),
            kind: HitKind::Class,
        });
        let props = self.properties.keys().filter(|i| hit(i)).map(|iri| SearchHit {
            iri: iri.clone(),
            kind: HitKind::Property,
        });
        classes.chain(props).collect()
    }

    /// Object properties whose range admits `c` (directly or through a
    /// superclass of `c`).
    pub fn properties_into(&self, c: &str) -> Vec<&OntologyProperty> {
        self.properties
            .values()
            .filter(|p| p.kind == PropertyKind::Object && p.range.iter().any(|r| self.is_a(c, r.as_str())))
            .collect()
    }
}

fn iri_objects<'g>(g: &'g Graph, s: &'g Term, p: &'g str) -> impl Iterator<Item = &'g Iri> + 'g {
    g.objects(s, p).filter_map(Term::as_iri)
}

fn build(g: &Graph, domain: &Regex) -> Result<OntologyInfo> {
    let in_domain = |i: &Iri| domain.is_match(i.as_str());
    let typed = |t: &str| -> BTreeSet<Iri> {
        g.subjects(rdf::TYPE, &Term::Iri(Iri::new_unchecked(t)))
            .filter_map(Term::as_iri)
            .filter(|i| in_domain(i))
            .cloned()
            .collect()
    };
    let mut class_iris = typed(owl::CLASS);

    let mut subclass_edges = BTreeSet::new();
    for t in g.matching(None, Some(rdfs::SUB_CLASS_OF), None) {
        if let (Some(c), Some(p)) = (t.subject().as_iri(), t.object().as_iri()) {
            if in_domain(c) && in_domain(p) && c != p {
                subclass_edges.insert((c.clone(), p.clone()));
            }
        }
    }

    let mut prop_iris = typed(owl::OBJECT_PROPERTY);
    prop_iris.extend(typed(owl::DATATYPE_PROPERTY));
    let mut properties = BTreeMap::new();
    for p in prop_iris {
        let subject = Term::Iri(p.clone());
        let dom: BTreeSet<Iri> = iri_objects(g, &subject, rdfs::DOMAIN).filter(|d| in_domain(d)).cloned().collect();
        let range: BTreeSet<Iri> = iri_objects(g, &subject, rdfs::RANGE).cloned().collect();
        if range.is_empty() {
            return Err(Error::EmptyRange(p.as_str().to_string()));
        }
        let kind = if range.iter().all(&in_domain) {
            PropertyKind::Object
        } else {
            PropertyKind::Datatype
        };
        if kind == PropertyKind::Object {
            class_iris.extend(range.iter().cloned());
        }
        class_iris.extend(dom.iter().cloned());
        properties.insert(
            p.clone(),
            OntologyProperty {
                iri: p,
                domain: dom.into_iter().collect(),
                range: range.into_iter().collect(),
                kind,
            },
        );
    }
    for (c, p) in &subclass_edges {
        class_iris.insert(c.clone());
        class_iris.insert(p.clone());
    }

    check_acyclic(&class_iris, &subclass_edges)?;

    let mut classes: BTreeMap<Iri, OntologyClass> = class_iris
        .into_iter()
        .map(|c| {
            let superclasses = subclass_edges.iter().filter(|(x, _)| *x == c).map(|(_, p)| p.clone()).collect();
            (
                c.clone(),
                OntologyClass {
                    iri: c,
                    superclasses,
                    datatype_properties: Vec::new(),
                    object_properties: Vec::new(),
                },
            )
        })
        .collect();
    for p in properties.values() {
        for d in &p.domain {
            if let Some(c) = classes.get_mut(d) {
                match p.kind {
                    PropertyKind::Datatype => c.datatype_properties.push(p.iri.clone()),
                    PropertyKind::Object => c.object_properties.push(p.iri.clone()),
                }
            }
        }
    }

    let mut enumerations = BTreeMap::new();
    for c in classes.keys() {
        let subject = Term::Iri(c.clone());
        let mut heads: Vec<&Term> = g.objects(&subject, owl::ONE_OF).collect();
        for eq in g.objects(&subject, owl::EQUIVALENT_CLASS) {
            heads.extend(g.objects(eq, owl::ONE_OF));
        }
        let mut members = Vec::new();
        for head in heads {
            members.extend(walk_list(g, head).into_iter().filter_map(|t| t.as_iri().cloned()));
        }
        if !members.is_empty() {
            enumerations.insert(c.clone(), members);
        }
    }

    Ok(OntologyInfo {
        classes,
        properties,
        enumerations,
        subclass_edges,
    })
}

/// RDF collection members, stopping at `rdf:nil` or a malformed cell.
fn walk_list<'g>(g: &'g Graph, head: &'g Term) -> Vec<&'g Term> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut cur = head;
    while cur.as_iri().is_none_or(|i| i.as_str() != rdf::NIL) && seen.insert(cur) {
        let Some(first) = g.objects(cur, rdf::FIRST).next() else { break };
        out.push(first);
        match g.objects(cur, rdf::REST).next() {
            Some(rest) => cur = rest,
            None => break,
        }
    }
    out
}

fn check_acyclic(classes: &BTreeSet<Iri>, edges: &BTreeSet<(Iri, Iri)>) -> Result<()> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&Iri, Mark> = BTreeMap::new();
    for start in classes {
        if marks.contains_key(start) {
            continue;
        }
        // iterative DFS: (node, next-edge cursor)
        let mut stack: Vec<(&Iri, Vec<&Iri>)> = vec![(start, parents(edges, start))];
        marks.insert(start, Mark::Open);
        while let Some((node, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(next) => match marks.get(next) {
                    Some(Mark::Open) => return Err(Error::SubclassCycle(next.as_str().to_string())),
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Open);
                        stack.push((next, parents(edges, next)));
                    }
                },
                None => {
                    marks.insert(node, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
    Ok(())
}

fn parents<'a>(edges: &'a BTreeSet<(Iri, Iri)>, c: &Iri) -> Vec<&'a Iri> {
    edges.iter().filter(|(x, _)| x == c).map(|(_, p)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use ontoquery_rdf::parse_turtle;

    fn chain() -> OntologyInfo {
        let ttl = r#"
            @prefix owl: <http://www.w3.org/2002/07/owl#> .
            @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
            @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
            @prefix : <http://x/#> .
            :A a owl:Class . :B a owl:Class ; rdfs:subClassOf :A . :C a owl:Class ; rdfs:subClassOf :B .
            :name a owl:DatatypeProperty ; rdfs:domain :A ; rdfs:range xsd:string .
            :size a owl:DatatypeProperty ; rdfs:domain :C ; rdfs:range xsd:int .
            :Color a owl:Class ; owl:equivalentClass [ owl:oneOf ( :Red :Green ) ] .
        "#;
        OntologyInfo::load_from_graph(&parse_turtle(ttl, None).unwrap(), "^http://x/").unwrap()
    }

    fn local(v: &[Iri]) -> Vec<&str> {
        v.iter().map(|i| i.local_name()).collect()
    }

    #[test]
    fn fixture_classes() {
        let o = fixtures::ontology();
        let names: Vec<&str> = o.classes.keys().map(|c| c.local_name()).collect();
        assert_eq!(names, ["Layer", "Measurement", "MeasurementMap", "MeasurementValue", "Table", "Test"]);
        assert_eq!(o.properties.len(), 22);
    }

    #[test]
    fn empty_and_unmatched() {
        let o = OntologyInfo::load_from_graph(&Graph::new(), ".*").unwrap();
        assert!(o.classes.is_empty());
        let o = OntologyInfo::load_from_graph(&fixtures::model_graph(), "^urn:nothing$").unwrap();
        assert!(o.classes.is_empty() && o.properties.is_empty());
    }

    #[test]
    fn hierarchy_navigation() {
        let o = chain();
        assert_eq!(local(&o.subclasses_of("http://x/#A", true).unwrap()), ["B", "C"]);
        assert_eq!(local(&o.subclasses_of("http://x/#A", false).unwrap()), ["B"]);
        assert_eq!(local(&o.superclasses_of("http://x/#C", true).unwrap()), ["A", "B"]);
        assert!(o.subclasses_of("http://x/#Nope", true).is_err());
        let fx = fixtures::ontology();
        assert!(fx.subclasses_of(&fixtures::tc("Test"), true).unwrap().is_empty());
    }

    #[test]
    fn properties_grouped_and_sorted() {
        let o = fixtures::ontology();
        let names: Vec<&str> = o.properties_of(&fixtures::tc("Test"), false).unwrap().iter().map(|p| p.iri.local_name()).collect();
        assert_eq!(names, ["testDate", "testNum", "testPurpose", "testTitle", "testType", "dataLayer"]);
        let names: Vec<&str> = o.properties_of(&fixtures::tc("Measurement"), false).unwrap().iter().map(|p| p.iri.local_name()).collect();
        assert_eq!(names, ["hasDescription", "hasUnits", "tag", "variableName", "hasMeasurementValue"]);
        let c = chain();
        let names: Vec<&str> = c.properties_of("http://x/#C", true).unwrap().iter().map(|p| p.iri.local_name()).collect();
        assert_eq!(names, ["name", "size"]);
        assert_eq!(c.properties_of("http://x/#C", false).unwrap().len(), 1);
    }

    #[test]
    fn enumerations_and_kinds() {
        let c = chain();
        assert_eq!(local(&c.enumerations[&Iri::new_unchecked("http://x/#Color")]), ["Red", "Green"]);
        let fx = fixtures::ontology();
        assert_eq!(fx.property(&fixtures::tc("dataLayer")).unwrap().kind, PropertyKind::Object);
        assert_eq!(fx.property(&fixtures::tc("testNum")).unwrap().kind, PropertyKind::Datatype);
    }

    #[test]
    fn search_examples() {
        let o = fixtures::ontology();
        let hits = o.search("variablename");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].iri.local_name(), "variableName");
        assert_eq!(o.search("").len(), o.classes.len() + o.properties.len());
        assert!(o.search("zzz").is_empty());
        let hits = o.search("measurement");
        let first_prop = hits.iter().position(|h| h.kind == HitKind::Property).unwrap();
        assert!(hits[..first_prop].iter().all(|h| h.kind == HitKind::Class));
    }

    #[test]
    fn load_errors() {
        let cyc = r#"
            @prefix owl: <http://www.w3.org/2002/07/owl#> .
            @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
            <http://x/A> a owl:Class ; rdfs:subClassOf <http://x/B> .
            <http://x/B> a owl:Class ; rdfs:subClassOf <http://x/A> .
        "#;
        let g = parse_turtle(cyc, None).unwrap();
        assert!(matches!(OntologyInfo::load_from_graph(&g, "^http://x/"), Err(Error::SubclassCycle(_))));
        let norange = "<http://x/p> a <http://www.w3.org/2002/07/owl#ObjectProperty> .";
        let g = parse_turtle(norange, None).unwrap();
        assert!(matches!(OntologyInfo::load_from_graph(&g, "^http://x/"), Err(Error::EmptyRange(_))));
    }

    #[test]
    fn out_of_domain_range_is_datatype_like() {
        let ttl = r#"
            @prefix owl: <http://www.w3.org/2002/07/owl#> .
            @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
            <http://x/A> a owl:Class .
            <http://x/sameAs> a owl:ObjectProperty ; rdfs:domain <http://x/A> ; rdfs:range <http://dbpedia.org/Thing> .
        "#;
        let o = OntologyInfo::load_from_graph(&parse_turtle(ttl, None).unwrap(), "^http://x/").unwrap();
        assert_eq!(o.property("http://x/sameAs").unwrap().kind, PropertyKind::Datatype);
        assert_eq!(o.classes.len(), 1);
    }
}
