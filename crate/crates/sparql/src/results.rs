//! Query results and the SPARQL 1.1 JSON results format.

use ontoquery_rdf::vocab::xsd;
use ontoquery_rdf::{BlankNode, Graph, Iri, Literal, Term};
use serde_json::{json, Map, Value};

use crate::{Error, Result};

/// Tabular solutions. Unbound cells are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>) -> Self {
        ResultTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        let name = name.trim_start_matches('?');
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, column: &str) -> Option<&Term> {
        let idx = self.column_index(column)?;
        self.rows.get(row)?.get(idx)?.as_ref()
    }

    /// Bound values of one column, in row order.
    pub fn column_values(&self, column: &str) -> Vec<&Term> {
        match self.column_index(column) {
            Some(idx) => self.rows.iter().filter_map(|r| r[idx].as_ref()).collect(),
            None => Vec::new(),
        }
    }

    /// The single integer cell of a COUNT result.
    pub fn count_value(&self) -> Option<u64> {
        let cell = self.rows.first()?.first()?.as_ref()?;
        cell.as_literal()?.lexical().trim().parse().ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryResult {
    Solutions(ResultTable),
    Boolean(bool),
    Graph(Graph),
}

impl QueryResult {
    pub fn into_table(self) -> Result<ResultTable> {
        match self {
            QueryResult::Solutions(t) => Ok(t),
            other => Err(Error::ResultFormat(format!("expected solutions, got {}", other.kind()))),
        }
    }

    pub fn as_bool(&self) -> Result<bool> {
        match self {
            QueryResult::Boolean(b) => Ok(*b),
            other => Err(Error::ResultFormat(format!("expected boolean, got {}", other.kind()))),
        }
    }

    pub fn into_graph(self) -> Result<Graph> {
        match self {
            QueryResult::Graph(g) => Ok(g),
            other => Err(Error::ResultFormat(format!("expected graph, got {}", other.kind()))),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            QueryResult::Solutions(_) => "solutions",
            QueryResult::Boolean(_) => "boolean",
            QueryResult::Graph(_) => "graph",
        }
    }
}

pub fn term_to_json(term: &Term) -> Value {
    match term {
        Term::Iri(i) => json!({"type": "uri", "value": i.as_str()}),
        Term::BlankNode(b) => json!({"type": "bnode", "value": b.label()}),
        Term::Literal(l) => {
            let mut m = Map::new();
            m.insert("type".into(), "literal".into());
            m.insert("value".into(), l.lexical().into());
            if let Some(lang) = l.language() {
                m.insert("xml:lang".into(), lang.into());
            } else if l.datatype().as_str() != xsd::STRING {
                m.insert("datatype".into(), l.datatype().as_str().into());
            }
            Value::Object(m)
        }
    }
}

pub fn term_from_json(value: &Value) -> Result<Term> {
    let bad = || Error::ResultFormat(format!("malformed RDF term {value}"));
    let kind = value.get("type").and_then(Value::as_str).ok_or_else(bad)?;
    let text = value.get("value").and_then(Value::as_str).ok_or_else(bad)?;
    match kind {
        "uri" => Ok(Term::Iri(Iri::new(text).map_err(|_| bad())?)),
        "bnode" => Ok(Term::BlankNode(BlankNode::new(text))),
        "literal" | "typed-literal" => {
            if let Some(lang) = value.get("xml:lang").and_then(Value::as_str) {
                Ok(Term::Literal(Literal::lang(text, lang)))
            } else if let Some(dt) = value.get("datatype").and_then(Value::as_str) {
                Ok(Term::Literal(Literal::typed(text, Iri::new(dt).map_err(|_| bad())?)))
            } else {
                Ok(Term::Literal(Literal::string(text)))
            }
        }
        _ => Err(bad()),
    }
}

/// `application/sparql-results+json` for a table.
pub fn table_to_json(table: &ResultTable) -> Value {
    let bindings: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (col, cell) in table.columns.iter().zip(row) {
                if let Some(t) = cell {
                    m.insert(col.clone(), term_to_json(t));
                }
            }
            Value::Object(m)
        })
        .collect();
    json!({"head": {"vars": table.columns}, "results": {"bindings": bindings}})
}

pub fn boolean_to_json(value: bool) -> Value {
    json!({"head": {}, "boolean": value})
}

/// Parses a SELECT or ASK results document.
pub fn parse_results_json(text: &str) -> Result<QueryResult> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::ResultFormat(e.to_string()))?;
    if let Some(b) = doc.get("boolean") {
        return b
            .as_bool()
            .map(QueryResult::Boolean)
            .ok_or_else(|| Error::ResultFormat("non-boolean 'boolean' member".into()));
    }
    let columns: Vec<String> = doc
        .pointer("/head/vars")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::ResultFormat("missing head.vars".into()))?
        .iter()
        .map(|v| v.as_str().map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::ResultFormat("non-string variable name".into()))?;
    let bindings = doc
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::ResultFormat("missing results.bindings".into()))?;
    let mut table = ResultTable::new(columns);
    for b in bindings {
        let obj = b
            .as_object()
            .ok_or_else(|| Error::ResultFormat("binding is not an object".into()))?;
        let row = table
            .columns
            .iter()
            .map(|c| obj.get(c).map(term_from_json).transpose())
            .collect::<Result<Vec<_>>>()?;
        table.rows.push(row);
    }
    Ok(QueryResult::Solutions(table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ask_document() {
        assert_eq!(parse_results_json(r#"{"boolean": true}"#).unwrap(), QueryResult::Boolean(true));
        assert_eq!(parse_results_json(&boolean_to_json(false).to_string()).unwrap(), QueryResult::Boolean(false));
    }

    #[test]
    fn table_round_trip() {
        let table = ResultTable {
            columns: vec!["a".into(), "b".into()],
            rows: vec![
                vec![
                    Some(Term::iri("http://x/1").unwrap()),
                    Some(Term::Literal(Literal::typed("4242", Iri::new_unchecked(xsd::INT)))),
                ],
                vec![Some(Term::Literal(Literal::lang("hi", "en"))), None],
                vec![Some(Term::Literal(Literal::string("plain"))), Some(BlankNode::new("b0").into())],
            ],
        };
        let back = parse_results_json(&table_to_json(&table).to_string()).unwrap();
        assert_eq!(back, QueryResult::Solutions(table));
    }

    #[test]
    fn malformed_documents() {
        assert!(parse_results_json("not json").is_err());
        assert!(parse_results_json(r#"{"head": {}}"#).is_err());
        assert!(parse_results_json(r#"{"head": {"vars": ["x"]}, "results": {"bindings": [{"x": {"type": "uri"}}]}}"#).is_err());
    }
}
