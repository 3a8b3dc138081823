use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::RwLock;

use ontoquery_rdf::{parse_turtle, Graph, Iri, Term, Triple};

use crate::ast::{Query, QueryForm};
use crate::eval::{EvalConfig, EvalStats, Evaluator, TripleSource};
use crate::results::QueryResult;
use crate::{parse_query, Error, Result, SparqlEndpoint};

/// Graph that receives `INSERT DATA` without a `GRAPH` block.
pub const DEFAULT_GRAPH: &str = "urn:x-ontoquery:default-graph";

#[derive(Debug, Clone, Default)]
struct IndexedGraph {
    all: BTreeSet<Triple>,
    by_s: HashMap<Term, BTreeSet<Triple>>,
    by_p: HashMap<Iri, BTreeSet<Triple>>,
    by_o: HashMap<Term, BTreeSet<Triple>>,
}

impl IndexedGraph {
    fn insert(&mut self, t: Triple) -> bool {
        if self.all.contains(&t) {
            return false;
        }
        self.by_s.entry(t.subject().clone()).or_default().insert(t.clone());
        self.by_p.entry(t.predicate().clone()).or_default().insert(t.clone());
        self.by_o.entry(t.object().clone()).or_default().insert(t.clone());
        self.all.insert(t)
    }

    fn remove(&mut self, t: &Triple) -> bool {
        if !self.all.remove(t) {
            return false;
        }
        fn drop_from<K: std::hash::Hash + Eq>(map: &mut HashMap<K, BTreeSet<Triple>>, key: &K, t: &Triple) {
            if let Some(set) = map.get_mut(key) {
                set.remove(t);
                if set.is_empty() {
                    map.remove(key);
                }
            }
        }
        drop_from(&mut self.by_s, t.subject(), t);
        drop_from(&mut self.by_p, t.predicate(), t);
        drop_from(&mut self.by_o, t.object(), t);
        true
    }

    fn candidates(&self, s: Option<&Term>, p: Option<&Iri>, o: Option<&Term>) -> Option<&BTreeSet<Triple>> {
        let lookups = [
            s.map(|s| self.by_s.get(s)),
            p.map(|p| self.by_p.get(p)),
            o.map(|o| self.by_o.get(o)),
        ];
        let mut best: Option<&BTreeSet<Triple>> = None;
        for set in lookups.into_iter().flatten() {
            let set = set?;
            if best.is_none_or(|b| set.len() < b.len()) {
                best = Some(set);
            }
        }
        Some(best.unwrap_or(&self.all))
    }
}

/// The graphs a query reads, unioned.
struct Dataset<'a> {
    graphs: Vec<&'a IndexedGraph>,
}

impl TripleSource for Dataset<'_> {
    fn scan(&self, s: Option<&Term>, p: Option<&Iri>, o: Option<&Term>, f: &mut dyn FnMut(&Triple) -> Result<()>) -> Result<()> {
        let mut seen = HashSet::new();
        for g in &self.graphs {
            let Some(cands) = g.candidates(s, p, o) else { continue };
            for t in cands {
                if s.is_some_and(|s| s != t.subject()) || p.is_some_and(|p| p != t.predicate()) || o.is_some_and(|o| o != t.object()) {
                    continue;
                }
                if self.graphs.len() > 1 && !seen.insert(t) {
                    continue;
                }
                f(t)?;
            }
        }
        Ok(())
    }
}

/// In-memory quad store. Many concurrent readers or one writer.
///
/// A query without FROM reads the union of every graph. Named graphs that
/// do not exist read as empty.
#[derive(Debug, Default)]
pub struct EmbeddedStore {
    graphs: RwLock<BTreeMap<Iri, IndexedGraph>>,
    config: EvalConfig,
}

impl EmbeddedStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(config: EvalConfig) -> Self {
        EmbeddedStore {
            graphs: RwLock::default(),
            config,
        }
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, BTreeMap<Iri, IndexedGraph>> {
        self.graphs.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, BTreeMap<Iri, IndexedGraph>> {
        self.graphs.write().unwrap_or_else(|e| e.into_inner())
    }

    /// Adds triples to a graph; returns how many were new.
    pub fn insert_triples(&self, graph: &Iri, triples: impl IntoIterator<Item = Triple>) -> usize {
        let mut graphs = self.write();
        let g = graphs.entry(graph.clone()).or_default();
        triples.into_iter().filter(|t| g.insert(t.clone())).count()
    }

    pub fn load_graph(&self, graph: &Iri, content: &Graph) -> usize {
        self.insert_triples(graph, content.iter().cloned())
    }

    pub fn load_turtle(&self, graph: &Iri, text: &str) -> Result<usize> {
        let parsed = parse_turtle(text, None)?;
        Ok(self.load_graph(graph, &parsed))
    }

    pub fn clear_graph(&self, graph: &Iri) {
        self.write().remove(graph);
    }

    /// Copy of one graph; empty when absent.
    pub fn graph(&self, graph: &Iri) -> Graph {
        let mut out = Graph::named(graph.clone());
        if let Some(g) = self.read().get(graph) {
            out.extend(g.all.iter().cloned());
        }
        out
    }

    pub fn graph_names(&self) -> Vec<Iri> {
        self.read().keys().cloned().collect()
    }

    pub fn graph_len(&self, graph: &Iri) -> usize {
        self.read().get(graph).map_or(0, |g| g.all.len())
    }

    /// Total triples across all graphs.
    pub fn len(&self) -> usize {
        self.read().values().map(|g| g.all.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every graph with its triples, for comparisons in tests.
    pub fn snapshot(&self) -> BTreeMap<Iri, BTreeSet<Triple>> {
        self.read().iter().map(|(k, g)| (k.clone(), g.all.clone())).collect()
    }

    pub fn query_with_stats(&self, text: &str) -> Result<(QueryResult, EvalStats)> {
        self.evaluate(&parse_query(text)?)
    }

    pub fn evaluate(&self, query: &Query) -> Result<(QueryResult, EvalStats)> {
        let from = match &query.form {
            QueryForm::Select(s) => &s.from,
            QueryForm::Ask { from, .. } | QueryForm::Construct { from, .. } => from,
            _ => return Err(Error::NotAQuery),
        };
        let graphs = self.read();
        let dataset = dataset(&graphs, from);
        let mut ev = Evaluator::new(&dataset, self.config);
        let result = ev.query(&query.form)?;
        Ok((result, ev.stats))
    }

    /// Applies INSERT DATA or DELETE/WHERE; returns the number of triples
    /// added or removed. All changes are computed before any is applied.
    pub fn apply_update(&self, query: &Query) -> Result<usize> {
        let mut graphs = self.write();
        match &query.form {
            QueryForm::InsertData { graph, triples } => {
                let name = graph.clone().unwrap_or_else(|| Iri::new_unchecked(DEFAULT_GRAPH));
                let g = graphs.entry(name).or_default();
                Ok(triples.iter().filter(|t| g.insert((*t).clone())).count())
            }
            QueryForm::DeleteWhere { with, template, pattern } => {
                let targets: Vec<Iri> = match with {
                    Some(g) => vec![g.clone()],
                    None => graphs.keys().cloned().collect(),
                };
                let doomed = {
                    let dataset = dataset(&graphs, &targets);
                    let mut ev = Evaluator::new(&dataset, self.config);
                    ev.delete_set(template, pattern)?
                };
                let mut removed = 0;
                for name in &targets {
                    if let Some(g) = graphs.get_mut(name) {
                        removed += doomed.iter().filter(|t| g.remove(t)).count();
                    }
                }
                Ok(removed)
            }
            _ => Err(Error::NotAnUpdate),
        }
    }
}

fn dataset<'a>(graphs: &'a BTreeMap<Iri, IndexedGraph>, from: &[Iri]) -> Dataset<'a> {
    let graphs = if from.is_empty() {
        graphs.values().collect()
    } else {
        let mut names: Vec<&Iri> = from.iter().collect();
        names.sort();
        names.dedup();
        names.into_iter().filter_map(|n| graphs.get(n)).collect()
    };
    Dataset { graphs }
}

impl SparqlEndpoint for EmbeddedStore {
    fn query(&self, text: &str) -> Result<QueryResult> {
        Ok(self.query_with_stats(text)?.0)
    }

    fn update(&self, text: &str) -> Result<()> {
        self.apply_update(&parse_query(text)?).map(|_| ())
    }

    fn describe(&self) -> String {
        format!("embedded store ({} graphs)", self.read().len())
    }
}
