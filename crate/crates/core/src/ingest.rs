//! CSV ingestion through a template nodegroup.
//!
//! Each row binds into a copy of the template, empty leaves are pruned,
//! lookup nodes are resolved against the store in one pass over all
//! rows, remaining nodes get fresh UUID IRIs, and the rows are written in
//! batches of INSERT DATA.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use ontoquery_rdf::{validate_literal, Iri, Triple, UuidMinter};
use ontoquery_sparql::SparqlEndpoint;
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::connection::Connection;
use crate::nodegroup::{Nodegroup, ValueConstraint};
use crate::oinfo::{OntologyInfo, PropertyKind};
use crate::sparqlgen::{generate_select, insert_text, insert_triples};
use crate::{Error, Result};

pub const DEFAULT_BATCH_ROWS: usize = 32;

/// Characters left as-is in instance IRIs: unreserved per RFC 3986.
const IRI_SAFE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Transform {
    RegexReplace { pattern: String, replacement: String },
    Uppercase,
    Lowercase,
    Trim,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum MappingItem {
    Column {
        header: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        transforms: Vec<Transform>,
    },
    Text {
        text: String,
    },
}

impl MappingItem {
    pub fn column(header: &str) -> Self {
        MappingItem::Column {
            header: header.to_string(),
            transforms: Vec::new(),
        }
    }

    pub fn text(text: &str) -> Self {
        MappingItem::Text { text: text.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LookupMode {
    #[default]
    CreateIfMissing,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Lookup {
    pub property_iris: Vec<Iri>,
    #[serde(default)]
    pub mode: LookupMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeMapping {
    /// Empty means a generated UUID.
    #[serde(default)]
    pub uri_items: Vec<MappingItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookup: Option<Lookup>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyMapping {
    pub node_id: String,
    pub property_iri: Iri,
    pub items: Vec<MappingItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImportSpec {
    pub base_uri: Iri,
    #[serde(default)]
    pub node_mappings: BTreeMap<String, NodeMapping>,
    #[serde(default)]
    pub property_mappings: Vec<PropertyMapping>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RowError {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestReport {
    pub rows_total: usize,
    pub rows_succeeded: usize,
    pub triples_inserted: usize,
    pub row_errors: Vec<RowError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    pub batch_rows: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            batch_rows: DEFAULT_BATCH_ROWS,
        }
    }
}

/// Header names to column positions, matched case-insensitively.
#[derive(Debug, Clone)]
pub struct Header {
    index: HashMap<String, usize>,
}

impl Header {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        Header {
            index: names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.as_ref().trim().to_lowercase(), i))
                .collect(),
        }
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(&name.trim().to_lowercase()).copied()
    }
}

/// An ImportSpec with its regexes compiled and checked against a template.
#[derive(Debug, Clone)]
struct Compiled<'a> {
    spec: &'a ImportSpec,
    regexes: HashMap<String, Regex>,
}

impl ImportSpec {
    pub fn new(base_uri: Iri) -> Self {
        ImportSpec {
            base_uri,
            node_mappings: BTreeMap::new(),
            property_mappings: Vec::new(),
        }
    }

    pub fn map_property(&mut self, node_id: &str, property_iri: &str, items: Vec<MappingItem>) {
        self.property_mappings.push(PropertyMapping {
            node_id: node_id.to_string(),
            property_iri: Iri::new_unchecked(property_iri),
            items,
        });
    }

    fn items(&self) -> impl Iterator<Item = &MappingItem> {
        self.node_mappings
            .values()
            .flat_map(|m| m.uri_items.iter())
            .chain(self.property_mappings.iter().flat_map(|m| m.items.iter()))
    }

    /// Column headers the spec reads.
    pub fn columns(&self) -> BTreeSet<String> {
        self.items()
            .filter_map(|i| match i {
                MappingItem::Column { header, .. } => Some(header.clone()),
                MappingItem::Text { .. } => None,
            })
            .collect()
    }

    /// Checks references into `template` and `oinfo`.
    pub fn validate(&self, template: &Nodegroup, oinfo: &OntologyInfo) -> Result<()> {
        let err = |m: String| Err(Error::ImportSpec(m));
        if !self.base_uri.as_str().ends_with(['#', '/']) {
            return err(format!("base URI {} must end with '#' or '/'", self.base_uri.as_str()));
        }
        for (id, m) in &self.node_mappings {
            let Some(node) = template.node(id) else {
                return err(format!("node {id} is not in the nodegroup"));
            };
            if let Some(lookup) = &m.lookup {
                if !m.uri_items.is_empty() {
                    return err(format!("node {id} has both URI items and a lookup"));
                }
                if lookup.property_iris.is_empty() {
                    return err(format!("lookup on {id} names no properties"));
                }
                for p in &lookup.property_iris {
                    let datatype = oinfo.property(p.as_str()).is_some_and(|p| p.kind == PropertyKind::Datatype);
                    if node.property(p.as_str()).is_none() || !datatype {
                        return err(format!("lookup property {} is not a datatype property of {id}", p.as_str()));
                    }
                    if !self.property_mappings.iter().any(|pm| &pm.node_id == id && &pm.property_iri == p) {
                        return err(format!("lookup property {} on {id} has no mapping", p.as_str()));
                    }
                }
            }
        }
        for pm in &self.property_mappings {
            let Some(node) = template.node(&pm.node_id) else {
                return err(format!("node {} is not in the nodegroup", pm.node_id));
            };
            if node.property(pm.property_iri.as_str()).is_none() {
                return err(format!("{} has no property {}", pm.node_id, pm.property_iri.as_str()));
            }
        }
        self.compile().map(|_| ())
    }

    fn compile(&self) -> Result<Compiled<'_>> {
        let mut regexes = HashMap::new();
        for item in self.items() {
            if let MappingItem::Column { transforms, .. } = item {
                for t in transforms {
                    if let Transform::RegexReplace { pattern, .. } = t {
                        let re = Regex::new(pattern).map_err(|e| Error::regex(pattern, e))?;
                        regexes.insert(pattern.clone(), re);
                    }
                }
            }
        }
        Ok(Compiled { spec: self, regexes })
    }
}

impl Compiled<'_> {
    /// Concatenated value of `items`, or `None` when every referenced cell
    /// is blank.
    fn evaluate(&self, items: &[MappingItem], header: &Header, row: &[String]) -> Option<String> {
        let mut out = String::new();
        let mut columns = 0;
        let mut filled = 0;
        for item in items {
            match item {
                MappingItem::Text { text } => out.push_str(text),
                MappingItem::Column { header: name, transforms } => {
                    columns += 1;
                    let cell = header.position(name).and_then(|i| row.get(i)).map_or("", String::as_str);
                    if cell.trim().is_empty() {
                        continue;
                    }
                    filled += 1;
                    let mut v = cell.to_string();
                    for t in transforms {
                        v = match t {
                            Transform::RegexReplace { pattern, replacement } => {
                                self.regexes[pattern].replace_all(&v, replacement.as_str()).into_owned()
                            }
                            Transform::Uppercase => v.to_uppercase(),
                            Transform::Lowercase => v.to_lowercase(),
                            Transform::Trim => v.trim().to_string(),
                        };
                    }
                    out.push_str(&v);
                }
            }
        }
        (columns == 0 || filled > 0).then_some(out)
    }
}

/// A row bound into its own copy of the template.
#[derive(Debug, Clone)]
pub struct BoundRow {
    pub row: usize,
    pub nodegroup: Nodegroup,
    /// Lookup node id → tuple of lookup property values.
    pub lookups: BTreeMap<String, Vec<String>>,
}

fn strip_template(template: &Nodegroup) -> Nodegroup {
    let mut ng = template.clone();
    for n in &mut ng.nodes {
        n.instance_value = None;
        for p in &mut n.property_items {
            p.binding_value = None;
        }
    }
    ng
}

/// Removes data-less leaves until none remain.
pub fn prune(ng: &mut Nodegroup) {
    loop {
        let links = ng.links();
        let leaf = (0..ng.nodes.len()).find(|&i| {
            let node = &ng.nodes[i];
            let neighbours: BTreeSet<usize> = links
                .iter()
                .filter_map(|l| match (l.source == i, l.target == i) {
                    (true, false) => Some(l.target),
                    (false, true) => Some(l.source),
                    _ => None,
                })
                .collect();
            let has_data = node.instance_value.is_some() || node.property_items.iter().any(|p| p.binding_value.is_some());
            neighbours.len() <= 1 && !has_data
        });
        let Some(i) = leaf else { break };
        let id = ng.nodes.remove(i).sparql_id;
        for n in &mut ng.nodes {
            for item in &mut n.node_items {
                if item.target.as_deref() == Some(id.as_str()) {
                    item.target = None;
                }
            }
        }
    }
}

fn bind_one(
    template: &Nodegroup,
    compiled: &Compiled<'_>,
    header: &Header,
    row_no: usize,
    row: &[String],
) -> std::result::Result<BoundRow, String> {
    let spec = compiled.spec;
    let mut ng = strip_template(template);
    for pm in &spec.property_mappings {
        let Some(value) = compiled.evaluate(&pm.items, header, row) else { continue };
        let node = ng.node_mut(&pm.node_id).map_err(|e| e.to_string())?;
        let item = node
            .property_items
            .iter_mut()
            .find(|p| p.property_iri == pm.property_iri)
            .ok_or_else(|| format!("{} has no property {}", pm.node_id, pm.property_iri.as_str()))?;
        let lit = validate_literal(&value, &item.range).map_err(|_| {
            let cols: Vec<String> = pm
                .items
                .iter()
                .filter_map(|i| match i {
                    MappingItem::Column { header, .. } => Some(header.clone()),
                    _ => None,
                })
                .collect();
            format!(
                "column {}: {value:?} is not a valid {} for {}",
                cols.join("+"),
                item.range.as_str(),
                pm.property_iri.local_name()
            )
        })?;
        item.binding_value = Some(lit.lexical().to_string());
    }
    let mut lookups = BTreeMap::new();
    for (id, m) in &spec.node_mappings {
        if let Some(lookup) = &m.lookup {
            let node = ng.node(id).ok_or_else(|| format!("node {id} is missing"))?;
            let mut tuple = Vec::new();
            for p in &lookup.property_iris {
                match node.property(p.as_str()).and_then(|i| i.binding_value.clone()) {
                    Some(v) => tuple.push(v),
                    None => return Err(format!("lookup on {id}: {} is blank", p.local_name())),
                }
            }
            lookups.insert(id.clone(), tuple);
        } else if !m.uri_items.is_empty() {
            if let Some(value) = compiled.evaluate(&m.uri_items, header, row) {
                let encoded = utf8_percent_encode(&value, IRI_SAFE).to_string();
                let iri = Iri::new(format!("{}{encoded}", spec.base_uri.as_str())).map_err(|e| e.to_string())?;
                ng.node_mut(id).map_err(|e| e.to_string())?.instance_value = Some(iri);
            }
        }
    }
    prune(&mut ng);
    Ok(BoundRow {
        row: row_no,
        nodegroup: ng,
        lookups,
    })
}

/// Binds one CSV row. Lookup and UUID nodes stay without an instance IRI.
pub fn bind_row(
    template: &Nodegroup,
    spec: &ImportSpec,
    header: &Header,
    row_no: usize,
    row: &[String],
) -> Result<std::result::Result<BoundRow, String>> {
    let compiled = spec.compile()?;
    Ok(bind_one(template, &compiled, header, row_no, row))
}

/// Resolves every lookup tuple with one query each and sets the instance
/// IRIs. Returns `(row, message)` for rows that cannot be resolved.
pub fn resolve_lookups(
    rows: &mut [BoundRow],
    spec: &ImportSpec,
    conn: &Connection,
    oinfo: &OntologyInfo,
    endpoint: &dyn SparqlEndpoint,
    minter: &mut UuidMinter,
) -> Result<Vec<RowError>> {
    let mut errors = Vec::new();
    for (id, mapping) in &spec.node_mappings {
        let Some(lookup) = &mapping.lookup else { continue };
        let mut groups: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            if let Some(t) = r.lookups.get(id) {
                groups.entry(t.clone()).or_default().push(i);
            }
        }
        let Some(class) = rows
            .iter()
            .find_map(|r| r.nodegroup.node(id))
            .map(|n| n.class_iri.clone())
        else {
            continue;
        };
        for (tuple, members) in groups {
            let matches = lookup_instances(&class, &lookup.property_iris, &tuple, conn, oinfo, endpoint)?;
            let resolved = match (matches.len(), lookup.mode) {
                (1, _) => Ok(matches[0].clone()),
                (0, LookupMode::CreateIfMissing) => Ok(minter.mint(&spec.base_uri)),
                (0, LookupMode::Error) => Err(format!("lookup on {id}: no {} matches {tuple:?}", class.local_name())),
                (_, _) => Err(format!("lookup on {id}: {tuple:?} matches several instances")),
            };
            for i in members {
                match &resolved {
                    Ok(iri) => {
                        if let Ok(n) = rows[i].nodegroup.node_mut(id) {
                            n.instance_value = Some(iri.clone());
                        }
                    }
                    Err(m) => errors.push(RowError {
                        row: rows[i].row,
                        message: m.clone(),
                    }),
                }
            }
        }
    }
    errors.sort_by_key(|e| e.row);
    Ok(errors)
}

fn lookup_instances(
    class: &Iri,
    props: &[Iri],
    tuple: &[String],
    conn: &Connection,
    oinfo: &OntologyInfo,
    endpoint: &dyn SparqlEndpoint,
) -> Result<Vec<Iri>> {
    let mut ng = Nodegroup::new();
    let id = ng.add_node(class.as_str(), oinfo)?;
    ng.set_node_returned(&id, true)?;
    for (p, v) in props.iter().zip(tuple) {
        ng.add_constraint(&id, p.as_str(), ValueConstraint::Values(vec![v.clone()]), None)?;
    }
    ng.set_limit(Some(2));
    let q = generate_select(&ng, conn, oinfo)?;
    let table = endpoint.query(&q.text)?.into_table()?;
    Ok(table
        .column_values(&id)
        .into_iter()
        .filter_map(|t| t.as_iri().cloned())
        .collect())
}

/// Header, then each record or its parse error.
type CsvRows = (Vec<String>, Vec<std::result::Result<Vec<String>, String>>);

fn read_csv(text: &str) -> Result<CsvRows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()).map_err(|e| e.to_string()))
        .collect();
    Ok((header, rows))
}

/// Runs the whole pipeline and reports per-row outcomes.
#[allow(clippy::too_many_arguments)]
pub fn ingest_csv(
    template: &Nodegroup,
    spec: &ImportSpec,
    csv_text: &str,
    conn: &Connection,
    oinfo: &OntologyInfo,
    endpoint: &dyn SparqlEndpoint,
    opts: IngestOptions,
    minter: &mut UuidMinter,
) -> Result<IngestReport> {
    ingest_csv_with_progress(template, spec, csv_text, conn, oinfo, endpoint, opts, minter, &mut |_, _| {})
}

/// [`ingest_csv`], calling `progress(rows_done, rows_total)` as rows are
/// rejected or their batch is written.
#[allow(clippy::too_many_arguments)]
pub fn ingest_csv_with_progress(
    template: &Nodegroup,
    spec: &ImportSpec,
    csv_text: &str,
    conn: &Connection,
    oinfo: &OntologyInfo,
    endpoint: &dyn SparqlEndpoint,
    opts: IngestOptions,
    minter: &mut UuidMinter,
    progress: &mut dyn FnMut(usize, usize),
) -> Result<IngestReport> {
    template.check(oinfo)?;
    spec.validate(template, oinfo)?;
    let compiled = spec.compile()?;
    let (names, records) = read_csv(csv_text)?;
    let header = Header::new(&names);
    let missing: Vec<String> = spec.columns().into_iter().filter(|c| header.position(c).is_none()).collect();
    if !missing.is_empty() {
        return Err(Error::Csv(format!("missing columns: {}", missing.join(", "))));
    }

    let outcomes: Vec<std::result::Result<BoundRow, RowError>> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 1;
            let fail = |message: String| RowError { row, message };
            let cells = rec.as_ref().map_err(|e| fail(e.clone()))?;
            bind_one(template, &compiled, &header, row, cells).map_err(fail)
        })
        .collect();

    let mut report = IngestReport {
        rows_total: records.len(),
        ..Default::default()
    };
    let mut bound = Vec::new();
    for o in outcomes {
        match o {
            Ok(b) => bound.push(b),
            Err(e) => report.row_errors.push(e),
        }
    }
    let lookup_errors = resolve_lookups(&mut bound, spec, conn, oinfo, endpoint, minter)?;
    let failed: BTreeSet<usize> = lookup_errors.iter().map(|e| e.row).collect();
    report.row_errors.extend(lookup_errors);
    bound.retain(|b| !failed.contains(&b.row));

    let mut per_row: Vec<Vec<Triple>> = Vec::with_capacity(bound.len());
    for b in &mut bound {
        for n in &mut b.nodegroup.nodes {
            if n.instance_value.is_none() {
                n.instance_value = Some(minter.mint(&spec.base_uri));
            }
        }
        per_row.push(insert_triples(&b.nodegroup)?);
    }

    let total = records.len();
    let mut done = report.row_errors.len();
    progress(done, total);
    let mut sent = BTreeSet::new();
    for chunk in per_row.chunks(opts.batch_rows.max(1)) {
        let triples: Vec<Triple> = chunk.iter().flatten().cloned().collect();
        if !triples.is_empty() {
            endpoint.update(&insert_text(&triples, conn)?)?;
            sent.extend(triples);
        }
        done += chunk.len();
        progress(done, total);
    }
    report.rows_succeeded = bound.len();
    report.triples_inserted = sent.len();
    report.row_errors.sort_by_key(|e| e.row);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, tc};
    use ontoquery_sparql::EmbeddedStore;

    fn header() -> Header {
        Header::new(&fixtures::SAMPLE_CSV.lines().next().unwrap().split(',').collect::<Vec<_>>())
    }

    fn row(i: usize) -> Vec<String> {
        fixtures::SAMPLE_CSV.lines().nth(i).unwrap().split(',').map(str::to_string).collect()
    }

    #[test]
    fn binds_first_row() {
        let (template, spec) = fixtures::ingest_template();
        let b = bind_row(&template, &spec, &header(), 1, &row(1)).unwrap().unwrap();
        let test = b.nodegroup.node("?Test").unwrap();
        assert_eq!(test.instance_value.as_ref().unwrap().as_str(), "http://iswc/data#TEST_4242");
        assert_eq!(test.property(&tc("testNum")).unwrap().binding_value.as_deref(), Some("4242"));
        let m = b.nodegroup.node("?Measurement").unwrap();
        let bound: Vec<_> = ["hasUnits", "tag", "variableName"]
            .iter()
            .map(|p| m.property(&tc(p)).unwrap().binding_value.clone().unwrap())
            .collect();
        assert_eq!(bound, ["F", "temp", "temperature"]);
        let mv = b.nodegroup.node("?MeasurementValue").unwrap();
        assert_eq!(mv.property(&tc("hasValue")).unwrap().binding_value.as_deref(), Some("200.5"));
        assert_eq!(b.nodegroup.nodes.len(), 6);
        assert_eq!(b.lookups["?Measurement"], ["F", "temp", "temperature"]);
    }

    #[test]
    fn blank_and_bad_cells() {
        let (template, spec) = fixtures::ingest_template();
        let mut r = row(1);
        r[4] = "  ".into();
        let err = bind_row(&template, &spec, &header(), 1, &r).unwrap().unwrap_err();
        assert!(err.contains("blank"), "{err}");
        let mut r = row(1);
        r[6] = "abc".into();
        let err = bind_row(&template, &spec, &header(), 1, &r).unwrap().unwrap_err();
        assert!(err.contains("XMLSchema#float") && err.contains("value"), "{err}");
    }

    #[test]
    fn blank_cell_leaves_property_unbound() {
        let (template, mut spec) = fixtures::ingest_template();
        spec.node_mappings.get_mut("?Measurement").unwrap().lookup = None;
        let mut r = row(1);
        r[4] = String::new();
        let b = bind_row(&template, &spec, &header(), 1, &r).unwrap().unwrap();
        let m = b.nodegroup.node("?Measurement").unwrap();
        assert!(m.property(&tc("hasUnits")).unwrap().binding_value.is_none());
        assert!(m.property(&tc("tag")).unwrap().binding_value.is_some());
    }

    #[test]
    fn prune_keeps_intermediaries() {
        let (template, _) = fixtures::ingest_template();
        let mut ng = strip_template(&template);
        ng.nodes[0].instance_value = Some(Iri::new_unchecked("http://x#t"));
        let last = ng.nodes.len() - 1;
        ng.nodes[last].property_items[0].binding_value = Some("1".into());
        prune(&mut ng);
        assert_eq!(ng.nodes.len(), 6);
        ng.nodes[last].property_items[0].binding_value = None;
        prune(&mut ng);
        assert_eq!(ng.nodes.len(), 1);
        ng.nodes[0].instance_value = None;
        prune(&mut ng);
        assert!(ng.is_empty());
    }

    #[test]
    fn transforms_and_encoding() {
        let (template, mut spec) = fixtures::ingest_template();
        spec.node_mappings.get_mut("?Test").unwrap().uri_items = vec![
            MappingItem::text("T "),
            MappingItem::Column {
                header: "LAYER_CODE".into(),
                transforms: vec![
                    Transform::Uppercase,
                    Transform::RegexReplace {
                        pattern: "[0-9]+".into(),
                        replacement: "#$0".into(),
                    },
                ],
            },
        ];
        let b = bind_row(&template, &spec, &header(), 1, &row(1)).unwrap().unwrap();
        let iri = b.nodegroup.node("?Test").unwrap().instance_value.clone().unwrap();
        assert_eq!(iri.as_str(), "http://iswc/data#T%20LAYER%231");
    }

    #[test]
    fn spec_validation() {
        let (template, spec) = fixtures::ingest_template();
        let o = fixtures::ontology();
        spec.validate(&template, &o).unwrap();
        let mut bad = spec.clone();
        bad.map_property("?Nope", &tc("code"), vec![MappingItem::column("layer_code")]);
        assert!(bad.validate(&template, &o).is_err());
        let mut bad = spec.clone();
        bad.node_mappings.get_mut("?Test").unwrap().uri_items = vec![MappingItem::Column {
            header: "test_number".into(),
            transforms: vec![Transform::RegexReplace {
                pattern: "(".into(),
                replacement: String::new(),
            }],
        }];
        assert!(matches!(bad.validate(&template, &o), Err(Error::Regex { .. })));
    }

    #[test]
    fn sample_counts_and_reingest() {
        let o = fixtures::ontology();
        let conn = fixtures::connection();
        let (template, spec) = fixtures::ingest_template();
        let store = EmbeddedStore::new();
        let mut minter = UuidMinter::seeded(7);
        let report = ingest_csv(&template, &spec, fixtures::SAMPLE_CSV, &conn, &o, &store, IngestOptions::default(), &mut minter).unwrap();
        assert_eq!((report.rows_total, report.rows_succeeded), (6, 6), "{report:?}");
        let g = store.graph(conn.first_data_graph().unwrap());
        let count = |local: &str| {
            g.subjects(ontoquery_rdf::vocab::rdf::TYPE, &ontoquery_rdf::Term::Iri(Iri::new_unchecked(tc(local))))
                .count()
        };
        let counts: Vec<usize> = ["Test", "Layer", "Table", "MeasurementMap", "Measurement", "MeasurementValue"]
            .iter()
            .map(|c| count(c))
            .collect();
        assert_eq!(counts, [1, 6, 6, 6, 2, 6]);
        let before = count("Measurement");
        ingest_csv(&template, &spec, fixtures::SAMPLE_CSV, &conn, &o, &store, IngestOptions { batch_rows: 4 }, &mut minter).unwrap();
        let g = store.graph(conn.first_data_graph().unwrap());
        let after = g
            .subjects(ontoquery_rdf::vocab::rdf::TYPE, &ontoquery_rdf::Term::Iri(Iri::new_unchecked(tc("Measurement"))))
            .count();
        assert_eq!(before, after);
    }

    #[test]
    fn error_mode_and_header_only() {
        let o = fixtures::ontology();
        let conn = fixtures::connection();
        let (template, mut spec) = fixtures::ingest_template();
        spec.node_mappings.get_mut("?Measurement").unwrap().lookup.as_mut().unwrap().mode = LookupMode::Error;
        let store = EmbeddedStore::new();
        let mut minter = UuidMinter::seeded(1);
        let report = ingest_csv(&template, &spec, fixtures::SAMPLE_CSV, &conn, &o, &store, IngestOptions::default(), &mut minter).unwrap();
        assert_eq!(report.row_errors.len(), 6);
        assert_eq!(report.rows_succeeded, 0);
        assert!(store.is_empty());
        let header_only = fixtures::SAMPLE_CSV.lines().next().unwrap();
        let report = ingest_csv(&template, &spec, header_only, &conn, &o, &store, IngestOptions::default(), &mut minter).unwrap();
        assert_eq!(report, IngestReport::default());
        let err = ingest_csv(&template, &spec, "a,b\n1,2\n", &conn, &o, &store, IngestOptions::default(), &mut minter);
        assert!(matches!(err, Err(Error::Csv(_))));
    }

    #[test]
    fn progress_is_monotone_and_complete() {
        let o = fixtures::ontology();
        let conn = fixtures::connection();
        let (template, spec) = fixtures::ingest_template();
        let store = EmbeddedStore::new();
        let mut seen = Vec::new();
        ingest_csv_with_progress(
            &template,
            &spec,
            fixtures::SAMPLE_CSV,
            &conn,
            &o,
            &store,
            IngestOptions { batch_rows: 2 },
            &mut UuidMinter::seeded(3),
            &mut |done, total| seen.push((done, total)),
        )
        .unwrap();
        assert_eq!(seen, [(0, 6), (2, 6), (4, 6), (6, 6)]);
    }
}
