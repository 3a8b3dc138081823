//! Nodegroup → SPARQL text.
//!
//! Nodes are emitted most-specific first: nodes without incoming links,
//! each followed by a depth-first walk of its outgoing links. Within a
//! node: type triple, used property items with their constraints, then
//! links. Optional links wrap everything beyond them in OPTIONAL.

mod runtime;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use ontoquery_rdf::vocab::{xsd, XSD};
use ontoquery_rdf::{escape_string, validate_literal, Iri, Literal, PrefixMap, Term, Triple};
use serde::{Deserialize, Serialize};

use crate::connection::Connection;
use crate::nodegroup::{DeleteMode, FilterOp, Link, Node, Nodegroup, OptionalDirection, PropertyItem, ValueConstraint};
use crate::oinfo::OntologyInfo;
use crate::{Error, Result};

pub use runtime::{apply_runtime_constraints, suggest_values, suggest_values_query, RuntimeConstraintValue, RuntimeOperation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum QueryType {
    Select,
    Count,
    Construct,
    Ask,
    Delete,
    Insert,
}

impl std::str::FromStr for QueryType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "select" => QueryType::Select,
            "count" => QueryType::Count,
            "construct" => QueryType::Construct,
            "ask" => QueryType::Ask,
            "delete" => QueryType::Delete,
            "insert" => QueryType::Insert,
            other => return Err(Error::Generation(format!("unknown query type {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratedQuery {
    pub text: String,
    #[serde(rename = "type")]
    pub query_type: QueryType,
    pub returned_ids: Vec<String>,
}

/// Body element before rendering.
#[derive(Debug, Clone)]
enum El {
    Triple([String; 3]),
    Filter(String),
    Values(String, Vec<String>),
    Optional(Vec<El>),
}

fn collect_triples<'e>(els: &'e [El], out: &mut Vec<&'e [String; 3]>) {
    for e in els {
        match e {
            El::Triple(t) => out.push(t),
            El::Optional(inner) => collect_triples(inner, out),
            _ => {}
        }
    }
}

fn render(els: &[El], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for e in els {
        match e {
            El::Triple([s, p, o]) => {
                let _ = writeln!(out, "{pad}{s} {p} {o} .");
            }
            El::Filter(expr) => {
                let _ = writeln!(out, "{pad}FILTER({expr})");
            }
            El::Values(var, vals) => {
                let _ = writeln!(out, "{pad}VALUES {var} {{ {} }}", vals.join(" "));
            }
            El::Optional(inner) => {
                let _ = writeln!(out, "{pad}OPTIONAL {{");
                render(inner, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

/// Node indices in emission order.
pub fn order_clauses(ng: &Nodegroup) -> Vec<usize> {
    let links = ng.links();
    let n = ng.nodes.len();
    let mut incoming = vec![0usize; n];
    for l in &links {
        incoming[l.target] += 1;
    }
    let by_id = |a: &usize, b: &usize| ng.nodes[*a].sparql_id.cmp(&ng.nodes[*b].sparql_id);
    let mut roots: Vec<usize> = (0..n).filter(|&i| incoming[i] == 0).collect();
    roots.sort_by(by_id);
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let visit = |start: usize, visited: &mut Vec<bool>, order: &mut Vec<usize>| {
        let mut stack = vec![start];
        while let Some(cur) = stack.pop() {
            if visited[cur] {
                continue;
            }
            visited[cur] = true;
            order.push(cur);
            let children: Vec<usize> = links.iter().filter(|l| l.source == cur).map(|l| l.target).collect();
            for c in children.into_iter().rev() {
                if !visited[c] {
                    stack.push(c);
                }
            }
        }
    };
    for r in roots {
        visit(r, &mut visited, &mut order);
    }
    loop {
        let mut rest: Vec<usize> = (0..n).filter(|&i| !visited[i]).collect();
        if rest.is_empty() {
            break;
        }
        rest.sort_by(by_id);
        visit(rest[0], &mut visited, &mut order);
    }
    order
}

/// Renders an IRI as a prefixed name when one is declared.
pub(crate) fn render_iri(prefixes: &PrefixMap, iri: &Iri) -> String {
    prefixes.abbreviate(iri).unwrap_or_else(|| format!("<{}>", iri.as_str()))
}

pub(crate) fn render_literal(prefixes: &PrefixMap, lit: &Literal) -> String {
    let body = format!("\"{}\"", escape_string(lit.lexical()));
    if let Some(lang) = lit.language() {
        format!("{body}@{lang}")
    } else if lit.datatype().as_str() == xsd::STRING {
        body
    } else {
        format!("{body}^^{}", render_iri(prefixes, lit.datatype()))
    }
}

pub(crate) fn render_term(prefixes: &PrefixMap, t: &Term) -> String {
    match t {
        Term::Iri(i) => render_iri(prefixes, i),
        Term::Literal(l) => render_literal(prefixes, l),
        Term::BlankNode(b) => format!("_:{}", b.label()),
    }
}

/// `XMLSchema:` plus a derived label for each namespace the nodegroup uses.
fn prefixes_for<'a>(iris: impl IntoIterator<Item = &'a Iri>) -> PrefixMap {
    let mut map = PrefixMap::new();
    map.insert("XMLSchema", XSD);
    for iri in iris {
        let ns = iri.namespace();
        if !ns.is_empty() && !iri.local_name().is_empty() {
            map.register_derived(ns);
        }
    }
    map
}

fn prefix_block(prefixes: &PrefixMap) -> String {
    prefixes.iter().map(|(l, ns)| format!("prefix {l}:<{ns}>\n")).collect()
}

fn nodegroup_iris(ng: &Nodegroup) -> Vec<&Iri> {
    let mut out = Vec::new();
    for n in &ng.nodes {
        out.push(&n.class_iri);
        out.extend(n.used_properties().map(|p| &p.property_iri));
        out.extend(n.node_items.iter().filter(|i| i.target.is_some()).map(|i| &i.predicate_iri));
    }
    out
}

fn from_clauses(conn: &Connection) -> String {
    let mut graphs = conn.data_graphs();
    graphs.extend(conn.model_graphs());
    graphs.iter().map(|g| format!("  FROM <{}>\n", g.as_str())).collect()
}

/// Builds query text for one nodegroup.
pub struct Generator<'a> {
    ng: &'a Nodegroup,
    conn: &'a Connection,
    oinfo: &'a OntologyInfo,
    order: Vec<usize>,
    prefixes: PrefixMap,
}

impl<'a> Generator<'a> {
    /// Checks the nodegroup and computes the clause order.
    pub fn new(ng: &'a Nodegroup, conn: &'a Connection, oinfo: &'a OntologyInfo) -> Result<Self> {
        ng.check(oinfo)?;
        for n in &ng.nodes {
            for p in &n.property_items {
                if p.is_runtime_constrained && p.constraints.is_empty() {
                    return Err(Error::UnsatisfiedRuntimeConstraint(p.sparql_id.clone().unwrap_or_default()));
                }
            }
        }
        Ok(Generator {
            ng,
            conn,
            oinfo,
            order: order_clauses(ng),
            prefixes: prefixes_for(nodegroup_iris(ng)),
        })
    }

    /// Emits nodes in `order` (a permutation of node indices) instead.
    pub fn with_order(mut self, order: Vec<usize>) -> Result<Self> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..self.ng.nodes.len()).collect::<Vec<_>>() {
            return Err(Error::Generation("node order is not a permutation of the nodes".into()));
        }
        self.order = order;
        Ok(self)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    fn iri(&self, iri: &Iri) -> String {
        render_iri(&self.prefixes, iri)
    }

    fn literal(&self, lexical: &str, range: &Iri) -> String {
        let lit = validate_literal(lexical, range).unwrap_or_else(|_| Literal::typed(lexical, range.clone()));
        render_literal(&self.prefixes, &lit)
    }

    /// Returned ids in clause order.
    pub fn returned_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        for &i in &self.order {
            let n = &self.ng.nodes[i];
            if n.is_returned {
                out.push(n.sparql_id.clone());
            }
            out.extend(n.property_items.iter().filter(|p| p.is_returned).filter_map(|p| p.sparql_id.clone()));
        }
        out
    }

    /// True when an incoming required link already implies the type.
    fn type_implied(&self, idx: usize, links: &[Link]) -> bool {
        let class = &self.ng.nodes[idx].class_iri;
        links.iter().any(|l| {
            let item = self.ng.link_item(*l);
            l.target == idx
                && item.optional_direction != OptionalDirection::SourceIsOptional
                && self
                    .oinfo
                    .property(item.predicate_iri.as_str())
                    .is_some_and(|p| p.range.len() == 1 && &p.range[0] == class)
        })
    }

    fn constraint_els(&self, item: &PropertyItem, id: &str) -> Vec<El> {
        let mut out = Vec::new();
        let mut filters = Vec::new();
        for c in &item.constraints {
            match c {
                ValueConstraint::Values(vals) => {
                    out.push(El::Values(id.to_string(), vals.iter().map(|v| self.literal(v, &item.range)).collect()));
                }
                ValueConstraint::Filter { op: FilterOp::Regex, operand } => {
                    filters.push(format!("regex(str({id}), \"{}\")", escape_string(operand)));
                }
                ValueConstraint::Filter { op, operand } => {
                    filters.push(format!("{id} {} {}", op.symbol(), self.literal(operand, &item.range)));
                }
            }
        }
        if !filters.is_empty() {
            out.push(El::Filter(filters.join(" && ")));
        }
        out
    }

    fn link_triple(&self, l: Link) -> El {
        El::Triple([
            self.ng.nodes[l.source].sparql_id.clone(),
            self.iri(&self.ng.link_item(l).predicate_iri),
            self.ng.nodes[l.target].sparql_id.clone(),
        ])
    }

    fn node_els(&self, idx: usize, ctx: &BodyContext) -> Vec<El> {
        let node: &Node = &self.ng.nodes[idx];
        let mut out = Vec::new();
        if !self.type_implied(idx, &ctx.links) {
            out.push(El::Triple([node.sparql_id.clone(), "a".into(), self.iri(&node.class_iri)]));
        }
        for item in node.used_properties() {
            let id = item.sparql_id.as_deref().unwrap();
            let mut els = vec![El::Triple([node.sparql_id.clone(), self.iri(&item.property_iri), id.to_string()])];
            els.extend(self.constraint_els(item, id));
            if item.is_optional {
                out.push(El::Optional(els));
            } else {
                out.extend(els);
            }
        }
        for (li, l) in ctx.links.iter().enumerate() {
            if l.source != idx {
                continue;
            }
            match self.ng.link_item(*l).optional_direction {
                OptionalDirection::None => out.push(self.link_triple(*l)),
                OptionalDirection::TargetIsOptional => out.push(self.optional_block(li, ctx)),
                OptionalDirection::SourceIsOptional => {}
            }
        }
        for (li, l) in ctx.links.iter().enumerate() {
            if l.target == idx && self.ng.link_item(*l).optional_direction == OptionalDirection::SourceIsOptional {
                out.push(self.optional_block(li, ctx));
            }
        }
        out
    }

    fn optional_block(&self, link_idx: usize, ctx: &BodyContext) -> El {
        let mut els = vec![self.link_triple(ctx.links[link_idx])];
        els.extend(self.scope_els(Some(link_idx), ctx));
        El::Optional(els)
    }

    fn scope_els(&self, scope: Option<usize>, ctx: &BodyContext) -> Vec<El> {
        let members: Vec<usize> = self.order.iter().copied().filter(|&i| ctx.innermost[i] == scope).collect();
        let mut out: Vec<El> = members.iter().flat_map(|&i| self.node_els(i, ctx)).collect();
        for i in members {
            out.extend(ctx.extra.get(&i).into_iter().flatten().cloned());
        }
        out
    }

    fn body(&self) -> Vec<El> {
        self.scope_els(None, &BodyContext::new(self.ng))
    }

    fn where_block(&self) -> String {
        let mut out = String::from("where {\n");
        render(&self.body(), 1, &mut out);
        out.push('}');
        out
    }

    fn modifiers(&self, with_order: bool, out: &mut String) {
        if with_order && !self.ng.order_by.is_empty() {
            let keys: Vec<String> = self
                .ng
                .order_by
                .iter()
                .map(|o| format!("{}({})", if o.descending { "DESC" } else { "ASC" }, o.sparql_id))
                .collect();
            let _ = write!(out, "\norder by {}", keys.join(" "));
        }
        if let Some(limit) = self.ng.limit {
            let _ = write!(out, "\nlimit {limit}");
        }
    }

    fn require_returned(&self) -> Result<Vec<String>> {
        let ids = self.returned_ids();
        if ids.is_empty() {
            return Err(Error::Generation("nothing is returned".into()));
        }
        Ok(ids)
    }

    pub fn select(&self) -> Result<GeneratedQuery> {
        let ids = self.require_returned()?;
        let mut text = prefix_block(&self.prefixes);
        let _ = write!(text, "select distinct {}\n{}{}", ids.join(" "), from_clauses(self.conn), self.where_block());
        self.modifiers(true, &mut text);
        text.push('\n');
        Ok(GeneratedQuery {
            text,
            query_type: QueryType::Select,
            returned_ids: ids,
        })
    }

    pub fn count(&self) -> Result<GeneratedQuery> {
        let ids = self.require_returned()?;
        let mut inner = String::new();
        let _ = writeln!(inner, "select distinct {}", ids.join(" "));
        let mut body = String::from("where {\n");
        render(&self.body(), 1, &mut body);
        body.push('}');
        inner.push_str(&body);
        self.modifiers(false, &mut inner);
        let indented: String = inner.lines().map(|l| format!("  {l}\n")).collect();
        let mut text = prefix_block(&self.prefixes);
        let _ = write!(text, "select (COUNT(*) as ?count)\n{}where {{\n{indented}}}\n", from_clauses(self.conn));
        Ok(GeneratedQuery {
            text,
            query_type: QueryType::Count,
            returned_ids: vec!["?count".into()],
        })
    }

    pub fn ask(&self) -> Result<GeneratedQuery> {
        self.require_nodes()?;
        let mut text = prefix_block(&self.prefixes);
        let _ = writeln!(text, "ask\n{}{}", from_clauses(self.conn), self.where_block());
        Ok(GeneratedQuery {
            text,
            query_type: QueryType::Ask,
            returned_ids: Vec::new(),
        })
    }

    fn require_nodes(&self) -> Result<()> {
        if self.ng.is_empty() {
            return Err(Error::Generation("nodegroup is empty".into()));
        }
        Ok(())
    }

    pub fn construct(&self) -> Result<GeneratedQuery> {
        self.require_nodes()?;
        let body = self.body();
        let mut triples = Vec::new();
        collect_triples(&body, &mut triples);
        let mut seen = HashSet::new();
        let template: Vec<El> = triples
            .into_iter()
            .filter(|t| seen.insert(*t))
            .map(|t| El::Triple(t.clone()))
            .collect();
        let mut text = prefix_block(&self.prefixes);
        text.push_str("construct {\n");
        render(&template, 1, &mut text);
        let _ = write!(text, "}}\n{}where {{\n", from_clauses(self.conn));
        render(&body, 1, &mut text);
        text.push('}');
        self.modifiers(false, &mut text);
        text.push('\n');
        Ok(GeneratedQuery {
            text,
            query_type: QueryType::Construct,
            returned_ids: Vec::new(),
        })
    }

    pub fn delete(&self) -> Result<GeneratedQuery> {
        let graph = self.conn.first_data_graph()?;
        let mut used: HashSet<String> = self.ng.used_ids().into_iter().collect();
        // `?X_pred0 ?X_obj0` out, `?X_subj1 ?X_pred1` in, bumping the number
        // past any id already taken
        let mut fresh = |x: &str, a: &str, b: &str, start: usize| -> (String, String) {
            let k = (start..)
                .step_by(2)
                .find(|k| !used.contains(&format!("{x}_{a}{k}")) && !used.contains(&format!("{x}_{b}{k}")))
                .unwrap();
            let pair = (format!("{x}_{a}{k}"), format!("{x}_{b}{k}"));
            used.insert(pair.0.clone());
            used.insert(pair.1.clone());
            pair
        };
        let mut template = Vec::new();
        let mut extra: HashMap<usize, Vec<El>> = HashMap::new();
        for &i in &self.order {
            let node = &self.ng.nodes[i];
            let x = &node.sparql_id;
            for item in node.used_properties().filter(|p| p.is_marked_for_deletion) {
                template.push(El::Triple([x.clone(), self.iri(&item.property_iri), item.sparql_id.clone().unwrap()]));
            }
            for l in self.ng.links().into_iter().filter(|l| l.source == i) {
                if self.ng.link_item(l).is_marked_for_deletion {
                    template.push(self.link_triple(l));
                }
            }
            let Some(mode) = node.delete_mode else { continue };
            let type_triple = El::Triple([x.clone(), "a".into(), self.iri(&node.class_iri)]);
            if mode == DeleteMode::Full {
                let (p0, o0) = fresh(x, "pred", "obj", 0);
                let (s1, p1) = fresh(x, "subj", "pred", 1);
                let out = [x.clone(), p0, o0];
                let inc = [s1, p1, x.clone()];
                template.push(El::Triple(out.clone()));
                template.push(El::Triple(inc.clone()));
                let e = extra.entry(i).or_default();
                e.push(El::Optional(vec![El::Triple(out)]));
                e.push(El::Optional(vec![El::Triple(inc)]));
                continue;
            }
            template.push(type_triple);
            let (outgoing, incoming): (BTreeSet<&Iri>, BTreeSet<&Iri>) = match mode {
                DeleteMode::TypeOnly => continue,
                DeleteMode::LimitedToModel => (
                    self.oinfo
                        .properties_of(node.class_iri.as_str(), true)?
                        .into_iter()
                        .map(|p| &p.iri)
                        .collect(),
                    self.oinfo
                        .properties_into(node.class_iri.as_str())
                        .into_iter()
                        .map(|p| &p.iri)
                        .collect(),
                ),
                DeleteMode::LimitedToNodegroup => {
                    let links: BTreeSet<&Iri> = self
                        .ng
                        .nodes
                        .iter()
                        .flat_map(|n| n.node_items.iter().filter(|i| i.target.is_some()).map(|i| &i.predicate_iri))
                        .collect();
                    let mut all = links.clone();
                    all.extend(self.ng.nodes.iter().flat_map(|n| n.used_properties().map(|p| &p.property_iri)));
                    (all, links)
                }
                DeleteMode::Full => unreachable!(),
            };
            if !outgoing.is_empty() {
                let (p, o) = fresh(x, "pred", "obj", 0);
                let t = [x.clone(), p.clone(), o];
                template.push(El::Triple(t.clone()));
                extra.entry(i).or_default().push(El::Optional(vec![
                    El::Triple(t),
                    El::Values(p, outgoing.into_iter().map(|i| self.iri(i)).collect()),
                ]));
            }
            if !incoming.is_empty() {
                let (s, p) = fresh(x, "subj", "pred", 1);
                let t = [s, p.clone(), x.clone()];
                template.push(El::Triple(t.clone()));
                extra.entry(i).or_default().push(El::Optional(vec![
                    El::Triple(t),
                    El::Values(p, incoming.into_iter().map(|i| self.iri(i)).collect()),
                ]));
            }
        }
        if template.is_empty() {
            return Err(Error::Generation("nothing is marked for deletion".into()));
        }
        let mut text = prefix_block(&self.prefixes);
        let _ = writeln!(text, "WITH <{}>\nDELETE {{", graph.as_str());
        render(&template, 1, &mut text);
        text.push_str("}\nWHERE {\n");
        let mut ctx = BodyContext::new(self.ng);
        ctx.extra = extra;
        render(&self.scope_els(None, &ctx), 1, &mut text);
        text.push_str("}\n");
        Ok(GeneratedQuery {
            text,
            query_type: QueryType::Delete,
            returned_ids: Vec::new(),
        })
    }
}

/// Link list and the innermost optional scope of every node.
struct BodyContext {
    links: Vec<Link>,
    innermost: Vec<Option<usize>>,
    /// Elements appended to a node's block (delete wildcards).
    extra: HashMap<usize, Vec<El>>,
}

impl BodyContext {
    fn new(ng: &Nodegroup) -> Self {
        let links = ng.links();
        let scopes = ng.optional_scopes();
        let mut innermost: Vec<Option<usize>> = vec![None; ng.nodes.len()];
        let mut best: Vec<usize> = vec![usize::MAX; ng.nodes.len()];
        for (link, side) in &scopes {
            let li = links.iter().position(|l| l == link).unwrap();
            for &n in side {
                if side.len() < best[n] {
                    best[n] = side.len();
                    innermost[n] = Some(li);
                }
            }
        }
        BodyContext {
            links,
            innermost,
            extra: HashMap::new(),
        }
    }
}

pub fn generate_select(ng: &Nodegroup, conn: &Connection, oinfo: &OntologyInfo) -> Result<GeneratedQuery> {
    Generator::new(ng, conn, oinfo)?.select()
}

pub fn generate_count(ng: &Nodegroup, conn: &Connection, oinfo: &OntologyInfo) -> Result<GeneratedQuery> {
    Generator::new(ng, conn, oinfo)?.count()
}

pub fn generate_ask(ng: &Nodegroup, conn: &Connection, oinfo: &OntologyInfo) -> Result<GeneratedQuery> {
    Generator::new(ng, conn, oinfo)?.ask()
}

pub fn generate_construct(ng: &Nodegroup, conn: &Connection, oinfo: &OntologyInfo) -> Result<GeneratedQuery> {
    Generator::new(ng, conn, oinfo)?.construct()
}

pub fn generate_delete(ng: &Nodegroup, conn: &Connection, oinfo: &OntologyInfo) -> Result<GeneratedQuery> {
    Generator::new(ng, conn, oinfo)?.delete()
}

pub fn generate(kind: QueryType, ng: &Nodegroup, conn: &Connection, oinfo: &OntologyInfo) -> Result<GeneratedQuery> {
    let g = Generator::new(ng, conn, oinfo)?;
    match kind {
        QueryType::Select => g.select(),
        QueryType::Count => g.count(),
        QueryType::Construct => g.construct(),
        QueryType::Ask => g.ask(),
        QueryType::Delete => g.delete(),
        QueryType::Insert => generate_insert(std::slice::from_ref(ng), conn),
    }
}

/// Concrete triples of a bound nodegroup: type, bound properties, links.
pub fn insert_triples(bound: &Nodegroup) -> Result<Vec<Triple>> {
    let type_iri = Iri::new_unchecked(ontoquery_rdf::vocab::rdf::TYPE);
    let instance = |n: &Node| -> Result<Iri> {
        n.instance_value
            .clone()
            .ok_or_else(|| Error::Generation(format!("node {} has no instance IRI", n.sparql_id)))
    };
    let mut out = Vec::new();
    for n in &bound.nodes {
        let s = instance(n)?;
        out.push(Triple::new(s.clone(), type_iri.clone(), n.class_iri.clone())?);
        for p in &n.property_items {
            if let Some(v) = &p.binding_value {
                let lit = validate_literal(v, &p.range).map_err(|e| Error::InvalidValue {
                    value: v.clone(),
                    datatype: p.range.as_str().to_string(),
                    reason: e.to_string(),
                })?;
                out.push(Triple::new(s.clone(), p.property_iri.clone(), lit)?);
            }
        }
        for item in &n.node_items {
            let Some(t) = &item.target else { continue };
            let target = bound
                .node(t)
                .ok_or_else(|| Error::Generation(format!("link target {t} is missing")))?;
            out.push(Triple::new(s.clone(), item.predicate_iri.clone(), instance(target)?)?);
        }
    }
    Ok(out)
}

/// One INSERT DATA covering every bound nodegroup.
pub fn generate_insert(bound: &[Nodegroup], conn: &Connection) -> Result<GeneratedQuery> {
    let mut triples = Vec::new();
    for ng in bound {
        triples.extend(insert_triples(ng)?);
    }
    Ok(GeneratedQuery {
        text: insert_text(&triples, conn)?,
        query_type: QueryType::Insert,
        returned_ids: Vec::new(),
    })
}

pub(crate) fn insert_text(triples: &[Triple], conn: &Connection) -> Result<String> {
    let graph = conn.first_data_graph()?;
    let mut iris: Vec<&Iri> = Vec::new();
    for t in triples {
        if t.predicate().as_str() == ontoquery_rdf::vocab::rdf::TYPE {
            if let Term::Iri(c) = t.object() {
                iris.push(c);
            }
        } else {
            iris.push(t.predicate());
        }
    }
    let prefixes = prefixes_for(iris);
    let mut text = prefix_block(&prefixes);
    let _ = writeln!(text, "INSERT DATA {{\n  GRAPH <{}> {{", graph.as_str());
    for t in triples {
        let p = if t.predicate().as_str() == ontoquery_rdf::vocab::rdf::TYPE {
            "a".to_string()
        } else {
            render_iri(&prefixes, t.predicate())
        };
        let _ = writeln!(
            text,
            "    {} {p} {} .",
            render_term(&prefixes, t.subject()),
            render_term(&prefixes, t.object())
        );
    }
    text.push_str("  }\n}\n");
    Ok(text)
}
