//! Nested-loop evaluation of the parsed subset.
//!
//! Patterns are joined left to right in textual order, one solution at a
//! time, so the cost of a query depends on how its clauses are ordered.
//! [`EvalStats::visited`] counts every intermediate solution produced.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use ontoquery_rdf::vocab::xsd;
use ontoquery_rdf::xsd::Value;
use ontoquery_rdf::{Graph, Iri, Literal, Term, Triple};
use regex::Regex;

use crate::ast::*;
use crate::results::{QueryResult, ResultTable};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    /// Upper bound on intermediate solutions before evaluation aborts.
    pub solution_cap: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            solution_cap: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalStats {
    /// Intermediate solutions produced by triple, VALUES and sub-select joins.
    pub visited: usize,
}

/// Read access to the triples of a dataset.
pub(crate) trait TripleSource {
    fn scan(&self, s: Option<&Term>, p: Option<&Iri>, o: Option<&Term>, f: &mut dyn FnMut(&Triple) -> Result<()>) -> Result<()>;
}

type Solution = HashMap<String, Term>;

pub(crate) struct Evaluator<'a> {
    source: &'a dyn TripleSource,
    cap: usize,
    pub stats: EvalStats,
    regexes: HashMap<(String, String), Option<Regex>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(source: &'a dyn TripleSource, config: EvalConfig) -> Self {
        Evaluator {
            source,
            cap: config.solution_cap,
            stats: EvalStats::default(),
            regexes: HashMap::new(),
        }
    }

    pub fn query(&mut self, form: &QueryForm) -> Result<QueryResult> {
        match form {
            QueryForm::Select(s) => Ok(QueryResult::Solutions(self.select(s)?)),
            QueryForm::Ask { pattern, .. } => Ok(QueryResult::Boolean(!self.group(pattern, vec![Solution::new()])?.is_empty())),
            QueryForm::Construct {
                template,
                pattern,
                limit,
                ..
            } => {
                let mut sols = self.group(pattern, vec![Solution::new()])?;
                if let Some(n) = limit {
                    sols.truncate(*n);
                }
                Ok(QueryResult::Graph(instantiate(template, &sols).into_iter().collect::<Graph>()))
            }
            QueryForm::InsertData { .. } | QueryForm::DeleteWhere { .. } => Err(Error::NotAQuery),
        }
    }

    /// Triples a DELETE/WHERE would remove.
    pub fn delete_set(&mut self, template: &[TriplePattern], pattern: &GroupPattern) -> Result<BTreeSet<Triple>> {
        let sols = self.group(pattern, vec![Solution::new()])?;
        Ok(instantiate(template, &sols))
    }

    fn tick(&mut self) -> Result<()> {
        self.stats.visited += 1;
        if self.stats.visited > self.cap {
            return Err(Error::SolutionCap(self.cap));
        }
        Ok(())
    }

    fn select(&mut self, q: &SelectQuery) -> Result<ResultTable> {
        let mut sols = self.group(&q.pattern, vec![Solution::new()])?;
        if let Projection::CountAll(var) = &q.projection {
            let n = if q.distinct { distinct_count(&sols) } else { sols.len() };
            let count = Literal::typed(n.to_string(), Iri::new_unchecked(xsd::INTEGER));
            return Ok(ResultTable {
                columns: vec![var.clone()],
                rows: vec![vec![Some(Term::Literal(count))]],
            });
        }
        if !q.order_by.is_empty() {
            let mut keyed: Vec<(Vec<Option<Term>>, Solution)> = Vec::with_capacity(sols.len());
            for s in sols {
                let keys = q.order_by.iter().map(|k| self.expr(&k.expr, &s)).collect();
                keyed.push((keys, s));
            }
            keyed.sort_by(|(a, _), (b, _)| {
                for (i, key) in q.order_by.iter().enumerate() {
                    let ord = order_terms(a[i].as_ref(), b[i].as_ref());
                    let ord = if key.descending { ord.reverse() } else { ord };
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                Ordering::Equal
            });
            sols = keyed.into_iter().map(|(_, s)| s).collect();
        }
        let columns = match &q.projection {
            Projection::Vars(v) => v.clone(),
            _ => pattern_vars(&q.pattern),
        };
        let mut rows: Vec<Vec<Option<Term>>> = sols
            .iter()
            .map(|s| columns.iter().map(|c| s.get(c).cloned()).collect())
            .collect();
        if q.distinct {
            let mut seen = HashSet::new();
            rows.retain(|r| seen.insert(r.clone()));
        }
        if let Some(n) = q.limit {
            rows.truncate(n);
        }
        Ok(ResultTable { columns, rows })
    }

    fn group(&mut self, g: &GroupPattern, input: Vec<Solution>) -> Result<Vec<Solution>> {
        let mut sols = input;
        let mut filters = Vec::new();
        for el in &g.elements {
            match el {
                PatternElement::Triple(tp) => sols = self.join_triple(tp, sols)?,
                PatternElement::Optional(inner) => {
                    let mut out = Vec::with_capacity(sols.len());
                    for s in sols {
                        let ext = self.group(inner, vec![s.clone()])?;
                        if ext.is_empty() {
                            out.push(s);
                        } else {
                            out.extend(ext);
                        }
                    }
                    sols = out;
                }
                PatternElement::Group(inner) => sols = self.group(inner, sols)?,
                PatternElement::Filter(e) => filters.push(e),
                PatternElement::Values(v) => {
                    let rows: Vec<Vec<(String, Term)>> = v
                        .rows
                        .iter()
                        .map(|r| {
                            v.vars
                                .iter()
                                .zip(r)
                                .filter_map(|(var, cell)| cell.clone().map(|t| (var.clone(), t)))
                                .collect()
                        })
                        .collect();
                    sols = self.join_rows(sols, &rows)?;
                }
                PatternElement::SubSelect(q) => {
                    let table = self.select(q)?;
                    let rows: Vec<Vec<(String, Term)>> = table
                        .rows
                        .into_iter()
                        .map(|r| {
                            table
                                .columns
                                .iter()
                                .zip(r)
                                .filter_map(|(c, cell)| cell.map(|t| (c.clone(), t)))
                                .collect()
                        })
                        .collect();
                    sols = self.join_rows(sols, &rows)?;
                }
            }
        }
        if !filters.is_empty() {
            let mut kept = Vec::with_capacity(sols.len());
            'sol: for s in sols {
                for f in &filters {
                    if self.expr(f, &s).as_ref().and_then(ebv) != Some(true) {
                        continue 'sol;
                    }
                }
                kept.push(s);
            }
            sols = kept;
        }
        Ok(sols)
    }

    fn join_triple(&mut self, tp: &TriplePattern, input: Vec<Solution>) -> Result<Vec<Solution>> {
        let source = self.source;
        let mut out = Vec::new();
        for sol in input {
            let s = resolve(&tp.subject, &sol);
            let p = match resolve(&tp.predicate, &sol) {
                Some(Term::Iri(i)) => Some(i),
                Some(_) => continue,
                None => None,
            };
            let o = resolve(&tp.object, &sol);
            let mut found = Vec::new();
            source.scan(s, p, o, &mut |t| {
                let mut ext = sol.clone();
                let pred = Term::Iri(t.predicate().clone());
                if bind(&mut ext, &tp.subject, t.subject()) && bind(&mut ext, &tp.predicate, &pred) && bind(&mut ext, &tp.object, t.object()) {
                    found.push(ext);
                }
                Ok(())
            })?;
            for ext in found {
                self.tick()?;
                out.push(ext);
            }
        }
        Ok(out)
    }

    fn join_rows(&mut self, input: Vec<Solution>, rows: &[Vec<(String, Term)>]) -> Result<Vec<Solution>> {
        let mut out = Vec::new();
        for sol in input {
            for row in rows {
                if row.iter().all(|(v, t)| sol.get(v).is_none_or(|b| b == t)) {
                    let mut ext = sol.clone();
                    for (v, t) in row {
                        ext.entry(v.clone()).or_insert_with(|| t.clone());
                    }
                    self.tick()?;
                    out.push(ext);
                }
            }
        }
        Ok(out)
    }

    /// Evaluates an expression. `None` is an evaluation error.
    fn expr(&mut self, e: &Expression, sol: &Solution) -> Option<Term> {
        match e {
            Expression::Var(v) => sol.get(v).cloned(),
            Expression::Term(t) => Some(t.clone()),
            Expression::Or(a, b) => {
                let a = self.expr(a, sol).as_ref().and_then(ebv);
                let b = self.expr(b, sol).as_ref().and_then(ebv);
                match (a, b) {
                    (Some(true), _) | (_, Some(true)) => Some(boolean(true)),
                    (Some(false), Some(false)) => Some(boolean(false)),
                    _ => None,
                }
            }
            Expression::And(a, b) => {
                let a = self.expr(a, sol).as_ref().and_then(ebv);
                let b = self.expr(b, sol).as_ref().and_then(ebv);
                match (a, b) {
                    (Some(false), _) | (_, Some(false)) => Some(boolean(false)),
                    (Some(true), Some(true)) => Some(boolean(true)),
                    _ => None,
                }
            }
            Expression::Not(a) => self.expr(a, sol).as_ref().and_then(ebv).map(|b| boolean(!b)),
            Expression::Compare(op, a, b) => {
                let a = self.expr(a, sol)?;
                let b = self.expr(b, sol)?;
                compare(*op, &a, &b).map(boolean)
            }
            Expression::Regex { text, pattern, flags } => {
                let text = self.expr(text, sol)?;
                let Term::Literal(text) = text else { return None };
                let pattern = self.expr(pattern, sol)?.as_literal()?.lexical().to_string();
                let flags = match flags {
                    Some(f) => self.expr(f, sol)?.as_literal()?.lexical().to_string(),
                    None => String::new(),
                };
                let re = self.regex(pattern, flags)?;
                Some(boolean(re.is_match(text.lexical())))
            }
            Expression::Str(a) => match self.expr(a, sol)? {
                Term::Iri(i) => Some(Term::Literal(Literal::string(i.as_str()))),
                Term::Literal(l) => Some(Term::Literal(Literal::string(l.lexical()))),
                Term::BlankNode(_) => None,
            },
            Expression::Bound(v) => Some(boolean(sol.contains_key(v))),
        }
    }

    fn regex(&mut self, pattern: String, flags: String) -> Option<&Regex> {
        self.regexes
            .entry((pattern, flags))
            .or_insert_with_key(|(pattern, flags)| {
                if !flags.chars().all(|c| matches!(c, 'i' | 's' | 'm' | 'x')) {
                    return None;
                }
                let full = if flags.is_empty() {
                    pattern.clone()
                } else {
                    format!("(?{flags}){pattern}")
                };
                Regex::new(&full).ok()
            })
            .as_ref()
    }
}

fn resolve<'s>(p: &'s TermPattern, sol: &'s Solution) -> Option<&'s Term> {
    match p {
        TermPattern::Var(v) => sol.get(v),
        TermPattern::Term(t) => Some(t),
    }
}

fn bind(sol: &mut Solution, p: &TermPattern, value: &Term) -> bool {
    match p {
        TermPattern::Term(_) => true,
        TermPattern::Var(v) => match sol.get(v) {
            Some(existing) => existing == value,
            None => {
                sol.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

fn instantiate(template: &[TriplePattern], sols: &[Solution]) -> BTreeSet<Triple> {
    let mut out = BTreeSet::new();
    for sol in sols {
        for tp in template {
            let (Some(s), Some(Term::Iri(p)), Some(o)) =
                (resolve(&tp.subject, sol), resolve(&tp.predicate, sol), resolve(&tp.object, sol))
            else {
                continue;
            };
            if let Ok(t) = Triple::new(s.clone(), p.clone(), o.clone()) {
                out.insert(t);
            }
        }
    }
    out
}

fn distinct_count(sols: &[Solution]) -> usize {
    let mut seen = HashSet::new();
    for s in sols {
        let mut row: Vec<(&String, &Term)> = s.iter().collect();
        row.sort();
        seen.insert(row);
    }
    seen.len()
}

/// Variables of a pattern in order of first appearance.
fn pattern_vars(g: &GroupPattern) -> Vec<String> {
    fn walk(g: &GroupPattern, out: &mut Vec<String>) {
        let add = |v: &str, out: &mut Vec<String>| {
            if !out.iter().any(|x| x == v) {
                out.push(v.to_string());
            }
        };
        for el in &g.elements {
            match el {
                PatternElement::Triple(tp) => {
                    for p in [&tp.subject, &tp.predicate, &tp.object] {
                        if let Some(v) = p.as_var() {
                            add(v, out);
                        }
                    }
                }
                PatternElement::Optional(inner) | PatternElement::Group(inner) => walk(inner, out),
                PatternElement::Values(v) => v.vars.iter().for_each(|x| add(x, out)),
                PatternElement::SubSelect(q) => match &q.projection {
                    Projection::Vars(vs) => vs.iter().for_each(|x| add(x, out)),
                    Projection::CountAll(v) => add(v, out),
                    Projection::Star => walk(&q.pattern, out),
                },
                PatternElement::Filter(_) => {}
            }
        }
    }
    let mut out = Vec::new();
    walk(g, &mut out);
    out
}

fn boolean(b: bool) -> Term {
    Term::Literal(Literal::typed(if b { "true" } else { "false" }, Iri::new_unchecked(xsd::BOOLEAN)))
}

/// Effective boolean value.
fn ebv(t: &Term) -> Option<bool> {
    let Term::Literal(l) = t else { return None };
    if l.language().is_some() {
        return Some(!l.lexical().is_empty());
    }
    match Value::of(l)? {
        Value::Boolean(b) => Some(b),
        Value::Integer(i) => Some(i != 0),
        Value::Number(n) => Some(n != 0.0 && !n.is_nan()),
        Value::String(s) => Some(!s.is_empty()),
        _ => None,
    }
}

/// Comparison with error-as-`None` semantics.
pub(crate) fn compare(op: CompareOp, a: &Term, b: &Term) -> Option<bool> {
    let test = |ord: Ordering| match op {
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::Ne => ord != Ordering::Equal,
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Ge => ord != Ordering::Less,
    };
    let equality = |eq: bool| match op {
        CompareOp::Eq => Some(eq),
        CompareOp::Ne => Some(!eq),
        _ => None,
    };
    match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => {
            let (vx, vy) = (Value::of(x), Value::of(y));
            if let (Some(vx), Some(vy)) = (&vx, &vy) {
                if let Some(ord) = vx.compare(vy) {
                    return Some(test(ord));
                }
            }
            if x == y {
                return equality(true);
            }
            let known = |l: &Literal, v: &Option<Value>| v.is_some() || l.language().is_some();
            if known(x, &vx) && known(y, &vy) {
                equality(false)
            } else {
                None
            }
        }
        (Term::Literal(_), _) | (_, Term::Literal(_)) => equality(false),
        _ => equality(a == b),
    }
}

/// Total order used by ORDER BY: unbound, blank nodes, IRIs, literals.
/// Literals group by value class, then compare by value, then lexically.
pub(crate) fn order_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn rank(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(Term::BlankNode(_)) => 1,
            Some(Term::Iri(_)) => 2,
            Some(Term::Literal(_)) => 3,
        }
    }
    match (a, b) {
        (Some(Term::BlankNode(x)), Some(Term::BlankNode(y))) => x.label().cmp(y.label()),
        (Some(Term::Iri(x)), Some(Term::Iri(y))) => x.as_str().cmp(y.as_str()),
        (Some(Term::Literal(x)), Some(Term::Literal(y))) => {
            let (cx, kx) = literal_key(x);
            let (cy, ky) = literal_key(y);
            cx.cmp(&cy)
                .then_with(|| kx.total_cmp(&ky))
                .then_with(|| match (Value::of(x), Value::of(y)) {
                    (Some(Value::String(s)), Some(Value::String(t))) => s.cmp(t),
                    _ => Ordering::Equal,
                })
                .then_with(|| x.cmp(y))
        }
        _ => rank(a).cmp(&rank(b)),
    }
}

fn literal_key(l: &Literal) -> (u8, f64) {
    match Value::of(l) {
        Some(Value::Integer(i)) => (0, i as f64),
        Some(Value::Number(n)) => (0, n),
        Some(Value::Boolean(b)) => (1, if b { 1.0 } else { 0.0 }),
        Some(Value::DateTime(d)) => (2, d.timestamp_micros() as f64),
        Some(Value::Date(d)) => (3, d.timestamp() as f64),
        Some(Value::Time(t)) => (4, t),
        Some(Value::String(_)) => (5, 0.0),
        None => (6, 0.0),
    }
}
