//! Runtime constraint values and value suggestion.

use std::str::FromStr;

use ontoquery_rdf::Term;
use ontoquery_sparql::SparqlEndpoint;
use serde::{Deserialize, Serialize};

use super::{GeneratedQuery, Generator};
use crate::connection::Connection;
use crate::nodegroup::{check_constraint, FilterOp, ItemRef, Nodegroup, ValueConstraint};
use crate::oinfo::OntologyInfo;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "operation", rename_all = "lowercase", rename_all_fields = "camelCase")]
pub enum RuntimeOperation {
    Matches {
        values: Vec<String>,
    },
    Regex {
        pattern: String,
    },
    Gt {
        value: String,
    },
    Gte {
        value: String,
    },
    Lt {
        value: String,
    },
    Lte {
        value: String,
    },
    Range {
        low: String,
        high: String,
        #[serde(default = "yes")]
        low_inclusive: bool,
        #[serde(default = "yes")]
        high_inclusive: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuntimeConstraintValue {
    pub sparql_id: String,
    #[serde(flatten)]
    pub operation: RuntimeOperation,
}

impl RuntimeOperation {
    fn constraints(&self) -> Vec<ValueConstraint> {
        let filter = |op, v: &str| ValueConstraint::Filter {
            op,
            operand: v.to_string(),
        };
        match self {
            RuntimeOperation::Matches { values } => vec![ValueConstraint::Values(values.clone())],
            RuntimeOperation::Regex { pattern } => vec![filter(FilterOp::Regex, pattern)],
            RuntimeOperation::Gt { value } => vec![filter(FilterOp::Gt, value)],
            RuntimeOperation::Gte { value } => vec![filter(FilterOp::Ge, value)],
            RuntimeOperation::Lt { value } => vec![filter(FilterOp::Lt, value)],
            RuntimeOperation::Lte { value } => vec![filter(FilterOp::Le, value)],
            RuntimeOperation::Range {
                low,
                high,
                low_inclusive,
                high_inclusive,
            } => vec![
                filter(if *low_inclusive { FilterOp::Ge } else { FilterOp::Gt }, low),
                filter(if *high_inclusive { FilterOp::Le } else { FilterOp::Lt }, high),
            ],
        }
    }
}

/// `?id=op:value[,value]`, with op one of matches, regex, gt, gte, lt,
/// lte, range. Regex patterns are taken whole; range is inclusive.
impl FromStr for RuntimeConstraintValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Document(format!("runtime constraint {s:?} is not id=op:value"));
        let (id, rest) = s.split_once('=').ok_or_else(bad)?;
        let (op, value) = rest.split_once(':').ok_or_else(bad)?;
        let id = id.trim();
        let sparql_id = if id.starts_with('?') { id.to_string() } else { format!("?{id}") };
        let list = || value.split(',').map(|v| v.trim().to_string()).collect::<Vec<_>>();
        let one = || value.trim().to_string();
        let operation = match op.trim().to_ascii_lowercase().as_str() {
            "matches" => RuntimeOperation::Matches { values: list() },
            "regex" => RuntimeOperation::Regex { pattern: value.to_string() },
            "gt" => RuntimeOperation::Gt { value: one() },
            "gte" => RuntimeOperation::Gte { value: one() },
            "lt" => RuntimeOperation::Lt { value: one() },
            "lte" => RuntimeOperation::Lte { value: one() },
            "range" => match list().as_slice() {
                [low, high] => RuntimeOperation::Range {
                    low: low.clone(),
                    high: high.clone(),
                    low_inclusive: true,
                    high_inclusive: true,
                },
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        };
        Ok(RuntimeConstraintValue { sparql_id, operation })
    }
}

/// A copy of `ng` with the supplied values in place of the stored
/// constraints of each flagged item.
pub fn apply_runtime_constraints(ng: &Nodegroup, values: &[RuntimeConstraintValue]) -> Result<Nodegroup> {
    let mut out = ng.clone();
    for v in values {
        let item = out.property_item_mut_by_id(&v.sparql_id)?;
        if !item.is_runtime_constrained {
            return Err(Error::NotRuntimeConstrained(v.sparql_id.clone()));
        }
        let checked = v
            .operation
            .constraints()
            .into_iter()
            .map(|c| check_constraint(c, None, &item.range))
            .collect::<Result<Vec<_>>>()?;
        item.constraints = checked;
    }
    for n in &out.nodes {
        for p in &n.property_items {
            if p.is_runtime_constrained && p.constraints.is_empty() {
                return Err(Error::UnsatisfiedRuntimeConstraint(p.sparql_id.clone().unwrap_or_default()));
            }
        }
    }
    Ok(out)
}

/// Select distinct of `target` alone, ignoring the target's own
/// constraints and any pending runtime flags.
pub fn suggest_values_query(ng: &Nodegroup, target: &str, conn: &Connection, oinfo: &OntologyInfo) -> Result<GeneratedQuery> {
    let mut work = ng.clone();
    let found = work.find_item(target).ok_or_else(|| Error::UnknownId(target.to_string()))?;
    for n in &mut work.nodes {
        n.is_returned = false;
        for p in &mut n.property_items {
            p.is_returned = false;
            p.is_runtime_constrained = false;
        }
    }
    match found {
        ItemRef::Node(ni) => work.nodes[ni].is_returned = true,
        ItemRef::Property(ni, pi) => {
            let item = &mut work.nodes[ni].property_items[pi];
            item.constraints.clear();
            item.is_returned = true;
        }
    }
    work.order_by.clear();
    work.limit = None;
    Generator::new(&work, conn, oinfo)?.select()
}

/// Distinct bound values of `target` that satisfy the rest of the
/// nodegroup, sorted.
pub fn suggest_values(
    ng: &Nodegroup,
    target: &str,
    conn: &Connection,
    oinfo: &OntologyInfo,
    endpoint: &dyn SparqlEndpoint,
) -> Result<Vec<Term>> {
    let q = suggest_values_query(ng, target, conn, oinfo)?;
    let table = endpoint.query(&q.text)?.into_table()?;
    let mut values: Vec<Term> = table.column_values(target).into_iter().cloned().collect();
    values.sort();
    values.dedup();
    Ok(values)
}
