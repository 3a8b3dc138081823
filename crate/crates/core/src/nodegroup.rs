//! The nodegroup: class-variable nodes, their property items and the links
//! between them, plus the annotations that drive query generation.
//!
//! Node and item references are SPARQL ids (`?Test`). Links live on the
//! source node as [`NodeItem`]s naming their target by id.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::LazyLock;

use ontoquery_rdf::xsd::XsdType;
use ontoquery_rdf::{validate_literal, Iri};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::connection::Connection;
use crate::ingest::ImportSpec;
use crate::oinfo::{OntologyInfo, PropertyKind};
use crate::pathfind::{AnchorEnd, Path};
use crate::{Error, Result};

pub const INTERCHANGE_VERSION: u64 = 1;

static ID_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\?[A-Za-z_][A-Za-z0-9_]*$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DeleteMode {
    TypeOnly,
    Full,
    LimitedToModel,
    LimitedToNodegroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OptionalDirection {
    #[default]
    None,
    TargetIsOptional,
    SourceIsOptional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "regex")]
    Regex,
}

impl FilterOp {
    pub fn symbol(self) -> &'static str {
        match self {
            FilterOp::Eq => "=",
            FilterOp::Ne => "!=",
            FilterOp::Gt => ">",
            FilterOp::Ge => ">=",
            FilterOp::Lt => "<",
            FilterOp::Le => "<=",
            FilterOp::Regex => "regex",
        }
    }
}

/// Lexical forms are typed by the owning item's range.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ValueConstraint {
    Values(Vec<String>),
    Filter { op: FilterOp, operand: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyItem {
    pub property_iri: Iri,
    pub range: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparql_id: Option<String>,
    #[serde(default)]
    pub is_returned: bool,
    #[serde(default)]
    pub is_optional: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ValueConstraint>,
    #[serde(default)]
    pub is_runtime_constrained: bool,
    #[serde(default)]
    pub is_marked_for_deletion: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding_value: Option<String>,
}

impl PropertyItem {
    pub fn new(property_iri: Iri, range: Iri) -> Self {
        PropertyItem {
            property_iri,
            range,
            sparql_id: None,
            is_returned: false,
            is_optional: false,
            constraints: Vec::new(),
            is_runtime_constrained: false,
            is_marked_for_deletion: false,
            binding_value: None,
        }
    }

    /// Whether the item contributes a triple pattern to queries.
    pub fn is_used(&self) -> bool {
        self.sparql_id.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeItem {
    pub predicate_iri: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default)]
    pub optional_direction: OptionalDirection,
    #[serde(default)]
    pub is_marked_for_deletion: bool,
}

impl NodeItem {
    pub fn new(predicate_iri: Iri) -> Self {
        NodeItem {
            predicate_iri,
            target: None,
            optional_direction: OptionalDirection::None,
            is_marked_for_deletion: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Node {
    pub sparql_id: String,
    pub class_iri: Iri,
    #[serde(default)]
    pub property_items: Vec<PropertyItem>,
    #[serde(default)]
    pub node_items: Vec<NodeItem>,
    #[serde(default)]
    pub is_returned: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delete_mode: Option<DeleteMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_value: Option<Iri>,
}

impl Node {
    pub fn property(&self, property_iri: &str) -> Option<&PropertyItem> {
        self.property_items.iter().find(|p| p.property_iri.as_str() == property_iri)
    }

    pub fn used_properties(&self) -> impl Iterator<Item = &PropertyItem> {
        self.property_items.iter().filter(|p| p.is_used())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrderItem {
    pub sparql_id: String,
    #[serde(default)]
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Nodegroup {
    pub nodes: Vec<Node>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<u64>,
    #[serde(default)]
    pub order_by: Vec<OrderItem>,
}

/// A connected NodeItem resolved to node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub source: usize,
    pub item: usize,
    pub target: usize,
}

/// What a SPARQL id names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemRef {
    Node(usize),
    Property(usize, usize),
}

/// The versioned interchange document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Document {
    pub version: u64,
    #[serde(flatten)]
    pub nodegroup: Nodegroup,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub import_spec: Option<ImportSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<Connection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub node_id: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.node_id, self.message)
    }
}

/// Restricts `name` to `[A-Za-z_][A-Za-z0-9_]*`.
pub fn sanitize_name(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        out.insert(0, '_');
    }
    out
}

pub fn is_valid_id(id: &str) -> bool {
    ID_RE.is_match(id)
}

fn is_numeric(dt: &Iri) -> bool {
    XsdType::from_iri(dt.as_str()).is_some_and(XsdType::is_numeric)
}

/// Validates `lexical` for an item with range `range`. A supplied operand
/// datatype must match the range, or both must be numeric.
pub fn check_operand(lexical: &str, datatype: Option<&Iri>, range: &Iri) -> Result<String> {
    if let Some(dt) = datatype {
        if dt != range && !(is_numeric(dt) && is_numeric(range)) {
            return Err(Error::InvalidValue {
                value: lexical.to_string(),
                datatype: range.as_str().to_string(),
                reason: format!("operand is typed {}", dt.as_str()),
            });
        }
    }
    validate_literal(lexical, range)
        .map(|l| l.lexical().to_string())
        .map_err(|e| Error::InvalidValue {
            value: lexical.to_string(),
            datatype: range.as_str().to_string(),
            reason: e.to_string(),
        })
}

/// Checks and canonicalises a constraint against `range`.
pub fn check_constraint(c: ValueConstraint, datatype: Option<&Iri>, range: &Iri) -> Result<ValueConstraint> {
    Ok(match c {
        ValueConstraint::Values(vals) => ValueConstraint::Values(
            vals.iter()
                .map(|v| check_operand(v, datatype, range))
                .collect::<Result<_>>()?,
        ),
        ValueConstraint::Filter { op: FilterOp::Regex, operand } => {
            Regex::new(&operand).map_err(|e| Error::regex(&operand, e))?;
            ValueConstraint::Filter {
                op: FilterOp::Regex,
                operand,
            }
        }
        ValueConstraint::Filter { op, operand } => ValueConstraint::Filter {
            op,
            operand: check_operand(&operand, datatype, range)?,
        },
    })
}

/// Range used for a property item. Object properties outside the domain
/// have class ranges and are kept as opaque values.
fn item_range(oinfo: &OntologyInfo, prop: &Iri) -> Result<Iri> {
    let p = oinfo
        .property(prop.as_str())
        .ok_or_else(|| Error::UnknownProperty(prop.as_str().to_string()))?;
    p.range.first().cloned().ok_or_else(|| Error::EmptyRange(prop.as_str().to_string()))
}

impl Nodegroup {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.sparql_id == id)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.sparql_id == id)
    }

    pub fn node_mut(&mut self, id: &str) -> Result<&mut Node> {
        self.nodes
            .iter_mut()
            .find(|n| n.sparql_id == id)
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    fn require_node(&self, id: &str) -> Result<usize> {
        self.node_index(id).ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Every id in use, nodes and items alike.
    pub fn used_ids(&self) -> BTreeSet<String> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            ids.insert(n.sparql_id.clone());
            ids.extend(n.property_items.iter().filter_map(|p| p.sparql_id.clone()));
        }
        ids
    }

    /// `?base`, or `?base_0`, `?base_1`, ... when taken.
    pub fn fresh_id(&self, base: &str) -> String {
        let used = self.used_ids();
        let base = sanitize_name(base);
        let plain = format!("?{base}");
        if !used.contains(&plain) {
            return plain;
        }
        (0..)
            .map(|i| format!("?{base}_{i}"))
            .find(|c| !used.contains(c))
            .unwrap()
    }

    pub fn find_item(&self, id: &str) -> Option<ItemRef> {
        for (ni, n) in self.nodes.iter().enumerate() {
            if n.sparql_id == id {
                return Some(ItemRef::Node(ni));
            }
            if let Some(pi) = n.property_items.iter().position(|p| p.sparql_id.as_deref() == Some(id)) {
                return Some(ItemRef::Property(ni, pi));
            }
        }
        None
    }

    pub fn find_property(&self, id: &str) -> Option<(usize, usize)> {
        match self.find_item(id) {
            Some(ItemRef::Property(n, p)) => Some((n, p)),
            _ => None,
        }
    }

    pub fn property_item(&self, id: &str) -> Result<&PropertyItem> {
        let (n, p) = self.find_property(id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
        Ok(&self.nodes[n].property_items[p])
    }

    pub fn property_item_mut_by_id(&mut self, id: &str) -> Result<&mut PropertyItem> {
        let (n, p) = self.find_property(id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
        Ok(&mut self.nodes[n].property_items[p])
    }

    fn property_index(&self, node_id: &str, property_iri: &str) -> Result<(usize, usize)> {
        let ni = self.require_node(node_id)?;
        let pi = self.nodes[ni]
            .property_items
            .iter()
            .position(|p| p.property_iri.as_str() == property_iri)
            .ok_or_else(|| Error::UnknownProperty(format!("{property_iri} on {node_id}")))?;
        Ok((ni, pi))
    }

    /// Gives a property item an id if it lacks one and returns it.
    pub fn ensure_property_id(&mut self, node_id: &str, property_iri: &str) -> Result<String> {
        let (ni, pi) = self.property_index(node_id, property_iri)?;
        Ok(self.ensure_id_at(ni, pi))
    }

    fn ensure_id_at(&mut self, ni: usize, pi: usize) -> String {
        if let Some(id) = &self.nodes[ni].property_items[pi].sparql_id {
            return id.clone();
        }
        let id = self.fresh_id(self.nodes[ni].property_items[pi].property_iri.local_name());
        self.nodes[ni].property_items[pi].sparql_id = Some(id.clone());
        id
    }

    /// Drops the id of an item nothing refers to any more.
    fn release_id_at(&mut self, ni: usize, pi: usize) {
        let item = &self.nodes[ni].property_items[pi];
        let still_used = item.is_returned
            || !item.constraints.is_empty()
            || item.is_runtime_constrained
            || item.is_marked_for_deletion
            || item.binding_value.is_some()
            || item.is_optional
            || self.order_by.iter().any(|o| Some(&o.sparql_id) == item.sparql_id.as_ref());
        if !still_used {
            self.nodes[ni].property_items[pi].sparql_id = None;
        }
    }

    pub fn add_node(&mut self, class_iri: &str, oinfo: &OntologyInfo) -> Result<String> {
        let class = oinfo.class(class_iri).ok_or_else(|| Error::UnknownClass(class_iri.to_string()))?;
        let mut node = Node {
            sparql_id: self.fresh_id(class.iri.local_name()),
            class_iri: class.iri.clone(),
            property_items: Vec::new(),
            node_items: Vec::new(),
            is_returned: false,
            delete_mode: None,
            instance_value: None,
        };
        for p in oinfo.properties_of(class_iri, true)? {
            let object_in_domain = p.kind == PropertyKind::Object && p.range.iter().all(|r| oinfo.contains_class(r.as_str()));
            if object_in_domain {
                node.node_items.push(NodeItem::new(p.iri.clone()));
            } else {
                node.property_items.push(PropertyItem::new(p.iri.clone(), item_range(oinfo, &p.iri)?));
            }
        }
        let id = node.sparql_id.clone();
        self.nodes.push(node);
        Ok(id)
    }

    /// Whether `predicate` may link a `source_class` node to a
    /// `target_class` node.
    pub fn link_allowed(oinfo: &OntologyInfo, source_class: &str, predicate: &str, target_class: &str) -> Result<()> {
        let p = oinfo
            .property(predicate)
            .filter(|p| p.kind == PropertyKind::Object)
            .ok_or_else(|| Error::UnknownProperty(predicate.to_string()))?;
        if !p.domain.iter().any(|d| oinfo.is_a(source_class, d.as_str())) {
            return Err(Error::InvalidNodegroup(format!("{source_class} is outside the domain of {predicate}")));
        }
        if !p.range.iter().any(|r| oinfo.is_a(target_class, r.as_str())) {
            return Err(Error::InvalidNodegroup(format!("{target_class} is outside the range of {predicate}")));
        }
        Ok(())
    }

    /// Links `source` to `target` through `predicate`, filling the first
    /// unconnected item for that predicate or adding another.
    pub fn add_link(&mut self, source: &str, predicate: &str, target: &str, oinfo: &OntologyInfo) -> Result<()> {
        let si = self.require_node(source)?;
        let ti = self.require_node(target)?;
        Self::link_allowed(oinfo, self.nodes[si].class_iri.as_str(), predicate, self.nodes[ti].class_iri.as_str())?;
        let target = self.nodes[ti].sparql_id.clone();
        let node = &mut self.nodes[si];
        match node
            .node_items
            .iter_mut()
            .find(|i| i.predicate_iri.as_str() == predicate && i.target.is_none())
        {
            Some(item) => item.target = Some(target),
            None => {
                let mut item = NodeItem::new(Iri::new_unchecked(predicate));
                item.target = Some(target);
                node.node_items.push(item);
            }
        }
        Ok(())
    }

    /// Instantiates the classes along `path` and links them. The anchor
    /// node is `anchor` when given, otherwise the first node of the
    /// path's anchor class. Returns the id of the node for the far end; a
    /// zero-length path resolves to the anchor itself.
    pub fn add_node_via_path(&mut self, path: &Path, anchor: Option<&str>, oinfo: &OntologyInfo) -> Result<String> {
        if path.is_empty() {
            if let Some(id) = anchor {
                self.node_index(id)
                    .ok_or_else(|| Error::Path(format!("anchor {id} is not in the nodegroup")))?;
                return Ok(id.to_string());
            }
            return match self.nodes.iter().find(|n| n.class_iri == path.start_class) {
                Some(n) => Ok(n.sparql_id.clone()),
                None => self.add_node(path.start_class.as_str(), oinfo),
            };
        }
        let (mut classes, _) = path
            .walk()
            .ok_or_else(|| Error::Path("consecutive hops do not share a class".into()))?;
        let mut hops = path.hops.clone();
        if path.anchor_end == AnchorEnd::End {
            classes.reverse();
            hops.reverse();
        }
        let anchor_class = &classes[0];
        let anchor_idx = match anchor {
            Some(id) => self
                .node_index(id)
                .ok_or_else(|| Error::Path(format!("anchor {id} is not in the nodegroup")))?,
            None => self
                .nodes
                .iter()
                .position(|n| n.class_iri == *anchor_class)
                .ok_or_else(|| Error::Path(format!("no node of class {} to anchor on", anchor_class.as_str())))?,
        };
        if !oinfo.is_a(self.nodes[anchor_idx].class_iri.as_str(), anchor_class.as_str()) {
            return Err(Error::Path(format!(
                "anchor {} is not a {}",
                self.nodes[anchor_idx].sparql_id,
                anchor_class.as_str()
            )));
        }
        for (i, hop) in hops.iter().enumerate() {
            Self::link_allowed(oinfo, hop.subject.as_str(), hop.predicate.as_str(), hop.object.as_str())
                .map_err(|e| Error::Path(e.to_string()))?;
            let forward = hop.subject == classes[i] && hop.object == classes[i + 1];
            let backward = hop.object == classes[i] && hop.subject == classes[i + 1];
            if !forward && !backward {
                return Err(Error::Path(format!("hop {i} does not continue the path")));
            }
        }
        let mut work = self.clone();
        let mut ids = vec![work.nodes[anchor_idx].sparql_id.clone()];
        for class in &classes[1..] {
            ids.push(work.add_node(class.as_str(), oinfo)?);
        }
        for (i, hop) in hops.iter().enumerate() {
            if hop.subject == classes[i] && hop.object == classes[i + 1] {
                work.add_link(&ids[i], hop.predicate.as_str(), &ids[i + 1], oinfo)?;
            } else {
                work.add_link(&ids[i + 1], hop.predicate.as_str(), &ids[i], oinfo)?;
            }
        }
        *self = work;
        Ok(ids.pop().unwrap())
    }

    pub fn set_node_returned(&mut self, node_id: &str, flag: bool) -> Result<()> {
        self.node_mut(node_id)?.is_returned = flag;
        Ok(())
    }

    /// Returns the property's id.
    pub fn set_property_returned(&mut self, node_id: &str, property_iri: &str, flag: bool) -> Result<String> {
        let (ni, pi) = self.property_index(node_id, property_iri)?;
        let id = self.ensure_id_at(ni, pi);
        self.nodes[ni].property_items[pi].is_returned = flag;
        if !flag {
            self.order_by.retain(|o| o.sparql_id != id);
            self.release_id_at(ni, pi);
        }
        Ok(id)
    }

    /// Sets returned on whatever `id` names.
    pub fn set_returned(&mut self, id: &str, flag: bool) -> Result<()> {
        match self.find_item(id).ok_or_else(|| Error::UnknownId(id.to_string()))? {
            ItemRef::Node(ni) => self.nodes[ni].is_returned = flag,
            ItemRef::Property(ni, pi) => {
                self.nodes[ni].property_items[pi].is_returned = flag;
                if !flag {
                    self.order_by.retain(|o| o.sparql_id != id);
                }
            }
        }
        Ok(())
    }

    pub fn set_property_optional(&mut self, node_id: &str, property_iri: &str, flag: bool) -> Result<String> {
        let (ni, pi) = self.property_index(node_id, property_iri)?;
        let id = self.ensure_id_at(ni, pi);
        self.nodes[ni].property_items[pi].is_optional = flag;
        Ok(id)
    }

    fn link_item_index(&self, source: &str, predicate: &str, target: &str) -> Result<(usize, usize)> {
        let si = self.require_node(source)?;
        let ii = self.nodes[si]
            .node_items
            .iter()
            .position(|i| i.predicate_iri.as_str() == predicate && i.target.as_deref() == Some(target))
            .ok_or_else(|| Error::UnknownId(format!("{source} {predicate} {target}")))?;
        Ok((si, ii))
    }

    pub fn set_link_optional(&mut self, source: &str, predicate: &str, target: &str, dir: OptionalDirection) -> Result<()> {
        let (si, ii) = self.link_item_index(source, predicate, target)?;
        self.nodes[si].node_items[ii].optional_direction = dir;
        Ok(())
    }

    /// Validates against the item's range and stores the constraint. A new
    /// Values list replaces the old one; filters accumulate.
    pub fn add_constraint(
        &mut self,
        node_id: &str,
        property_iri: &str,
        constraint: ValueConstraint,
        datatype: Option<&Iri>,
    ) -> Result<String> {
        let (ni, pi) = self.property_index(node_id, property_iri)?;
        let checked = check_constraint(constraint, datatype, &self.nodes[ni].property_items[pi].range)?;
        let id = self.ensure_id_at(ni, pi);
        let item = &mut self.nodes[ni].property_items[pi];
        if matches!(checked, ValueConstraint::Values(_)) {
            item.constraints.retain(|c| !matches!(c, ValueConstraint::Values(_)));
        }
        item.constraints.push(checked);
        Ok(id)
    }

    pub fn clear_constraints(&mut self, node_id: &str, property_iri: &str) -> Result<()> {
        let (ni, pi) = self.property_index(node_id, property_iri)?;
        self.nodes[ni].property_items[pi].constraints.clear();
        self.release_id_at(ni, pi);
        Ok(())
    }

    pub fn set_runtime_constrained(&mut self, node_id: &str, property_iri: &str, flag: bool) -> Result<String> {
        let (ni, pi) = self.property_index(node_id, property_iri)?;
        let id = self.ensure_id_at(ni, pi);
        self.nodes[ni].property_items[pi].is_runtime_constrained = flag;
        Ok(id)
    }

    pub fn mark_node_for_deletion(&mut self, node_id: &str, mode: Option<DeleteMode>) -> Result<()> {
        self.node_mut(node_id)?.delete_mode = mode;
        Ok(())
    }

    pub fn mark_property_for_deletion(&mut self, node_id: &str, property_iri: &str, flag: bool) -> Result<String> {
        let (ni, pi) = self.property_index(node_id, property_iri)?;
        let id = self.ensure_id_at(ni, pi);
        self.nodes[ni].property_items[pi].is_marked_for_deletion = flag;
        Ok(id)
    }

    pub fn mark_link_for_deletion(&mut self, source: &str, predicate: &str, target: &str, flag: bool) -> Result<()> {
        let (si, ii) = self.link_item_index(source, predicate, target)?;
        self.nodes[si].node_items[ii].is_marked_for_deletion = flag;
        Ok(())
    }

    pub fn add_order_by(&mut self, id: &str, descending: bool) -> Result<()> {
        if !self.returned_ids().iter().any(|r| r == id) {
            return Err(Error::InvalidNodegroup(format!("cannot sort on {id}: not returned")));
        }
        self.order_by.retain(|o| o.sparql_id != id);
        self.order_by.push(OrderItem {
            sparql_id: id.to_string(),
            descending,
        });
        Ok(())
    }

    pub fn set_limit(&mut self, limit: Option<u64>) {
        self.limit = limit;
    }

    /// Returned ids in node order, each node before its items.
    pub fn returned_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if n.is_returned {
                out.push(n.sparql_id.clone());
            }
            out.extend(
                n.property_items
                    .iter()
                    .filter(|p| p.is_returned)
                    .filter_map(|p| p.sparql_id.clone()),
            );
        }
        out
    }

    /// Connected node items with both ends resolved.
    pub fn links(&self) -> Vec<Link> {
        let index: BTreeMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.sparql_id.as_str(), i))
            .collect();
        let mut out = Vec::new();
        for (si, n) in self.nodes.iter().enumerate() {
            for (ii, item) in n.node_items.iter().enumerate() {
                if let Some(&ti) = item.target.as_deref().and_then(|t| index.get(t)) {
                    out.push(Link {
                        source: si,
                        item: ii,
                        target: ti,
                    });
                }
            }
        }
        out
    }

    pub fn link_item(&self, link: Link) -> &NodeItem {
        &self.nodes[link.source].node_items[link.item]
    }

    /// Node indices reachable from `start` ignoring link direction,
    /// without crossing `cut`.
    pub fn component(&self, start: usize, cut: Option<Link>) -> BTreeSet<usize> {
        let links = self.links();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(cur) = stack.pop() {
            for l in &links {
                if Some(*l) == cut {
                    continue;
                }
                let next = if l.source == cur {
                    l.target
                } else if l.target == cur {
                    l.source
                } else {
                    continue;
                };
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        seen
    }

    pub fn to_document(&self) -> Document {
        Document {
            version: INTERCHANGE_VERSION,
            nodegroup: self.clone(),
            import_spec: None,
            connection: None,
        }
    }

    pub fn to_interchange(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("nodegroup serializes")
    }

    pub fn from_interchange(text: &str, oinfo: &OntologyInfo) -> Result<Self> {
        Ok(Document::parse(text, oinfo)?.nodegroup)
    }

    /// Every invariant violation, each tagged with the node it concerns.
    pub fn validate(&self, oinfo: &OntologyInfo) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |node: &str, msg: String| {
            out.push(Violation {
                node_id: node.to_string(),
                message: msg,
            })
        };
        let mut seen = HashSet::new();
        let mut dupes = BTreeSet::new();
        for n in &self.nodes {
            let ids = std::iter::once(n.sparql_id.as_str()).chain(n.property_items.iter().filter_map(|p| p.sparql_id.as_deref()));
            for id in ids {
                if !is_valid_id(id) {
                    push(&n.sparql_id, format!("malformed sparql id {id:?}"));
                }
                if !seen.insert(id) && dupes.insert(id) {
                    push(&n.sparql_id, format!("duplicate sparql id {id}"));
                }
            }
        }
        for n in &self.nodes {
            let id = &n.sparql_id;
            let class_known = oinfo.contains_class(n.class_iri.as_str());
            if !class_known {
                push(id, format!("unknown class {}", n.class_iri.as_str()));
            }
            for p in &n.property_items {
                if oinfo.property(p.property_iri.as_str()).is_none() {
                    push(id, format!("unknown property {}", p.property_iri.as_str()));
                }
                if (p.is_returned || !p.constraints.is_empty() || p.is_runtime_constrained || p.binding_value.is_some())
                    && p.sparql_id.is_none()
                {
                    push(id, format!("{} is used but has no sparql id", p.property_iri.as_str()));
                }
                for c in &p.constraints {
                    if let Err(e) = check_constraint(c.clone(), None, &p.range) {
                        push(id, e.to_string());
                    }
                }
            }
            for item in &n.node_items {
                let Some(target) = &item.target else { continue };
                let Some(t) = self.node(target) else {
                    push(id, format!("link {} targets missing node {target}", item.predicate_iri.as_str()));
                    continue;
                };
                if class_known {
                    if let Err(e) = Self::link_allowed(oinfo, n.class_iri.as_str(), item.predicate_iri.as_str(), t.class_iri.as_str()) {
                        push(id, e.to_string());
                    }
                }
            }
        }
        if self.nodes.len() > 1 && self.component(0, None).len() != self.nodes.len() {
            push(&self.nodes[0].sparql_id, "nodegroup is not connected".into());
        }
        let returned = self.returned_ids();
        for o in &self.order_by {
            if !returned.contains(&o.sparql_id) {
                push(&o.sparql_id, "order by refers to an id that is not returned".into());
            }
        }
        if self.limit == Some(0) {
            push("", "limit must be positive".into());
        }
        for (node, msg) in self.optional_violations() {
            push(&node, msg);
        }
        out
    }

    pub fn check(&self, oinfo: &OntologyInfo) -> Result<()> {
        let v = self.validate(oinfo);
        if v.is_empty() {
            Ok(())
        } else {
            let text: Vec<String> = v.iter().map(ToString::to_string).collect();
            Err(Error::InvalidNodegroup(text.join("; ")))
        }
    }

    /// Optional links and the nodes they make optional.
    pub fn optional_scopes(&self) -> Vec<(Link, BTreeSet<usize>)> {
        let mut out = Vec::new();
        for l in self.links() {
            let item = self.link_item(l);
            let near = match item.optional_direction {
                OptionalDirection::None => continue,
                OptionalDirection::TargetIsOptional => l.source,
                OptionalDirection::SourceIsOptional => l.target,
            };
            let far = if near == l.source { l.target } else { l.source };
            let side = self.component(far, Some(l));
            if side.contains(&near) {
                out.push((l, BTreeSet::new()));
            } else {
                out.push((l, side));
            }
        }
        out
    }

    fn optional_violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let scopes = self.optional_scopes();
        for (l, side) in &scopes {
            if side.is_empty() {
                out.push((
                    self.nodes[l.source].sparql_id.clone(),
                    format!("optional link {} lies on a cycle", self.link_item(*l).predicate_iri.as_str()),
                ));
            }
        }
        for (i, (la, a)) in scopes.iter().enumerate() {
            for (lb, b) in &scopes[i + 1..] {
                let overlap = a.intersection(b).next().is_some();
                if overlap && !a.is_subset(b) && !b.is_subset(a) {
                    out.push((
                        self.nodes[la.source].sparql_id.clone(),
                        format!(
                            "optional links {} and {} make overlapping parts optional",
                            self.link_item(*la).predicate_iri.as_str(),
                            self.link_item(*lb).predicate_iri.as_str()
                        ),
                    ));
                }
            }
        }
        if !self.nodes.is_empty() {
            let optional: BTreeSet<usize> = scopes.iter().flat_map(|(_, s)| s.iter().copied()).collect();
            if optional.len() == self.nodes.len() {
                out.push((self.nodes[0].sparql_id.clone(), "every node is optional".into()));
            }
        }
        out
    }
}

impl Document {
    pub fn new(nodegroup: Nodegroup) -> Self {
        nodegroup.to_document()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// Parses and checks version and ontology references. Structural
    /// checks are left to [`Nodegroup::validate`].
    pub fn parse(text: &str, oinfo: &OntologyInfo) -> Result<Self> {
        let doc = Self::parse_unchecked(text)?;
        for n in &doc.nodegroup.nodes {
            if !oinfo.contains_class(n.class_iri.as_str()) {
                return Err(Error::UnknownClass(n.class_iri.as_str().to_string()));
            }
            let props = n
                .property_items
                .iter()
                .map(|p| &p.property_iri)
                .chain(n.node_items.iter().map(|i| &i.predicate_iri));
            for p in props {
                if oinfo.property(p.as_str()).is_none() {
                    return Err(Error::UnknownProperty(p.as_str().to_string()));
                }
            }
        }
        Ok(doc)
    }

    /// Parses and checks only the version.
    pub fn parse_unchecked(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        let version = raw
            .get("version")
            .ok_or_else(|| Error::Document("missing version".into()))?
            .as_u64()
            .ok_or_else(|| Error::Document("version must be a positive integer".into()))?;
        if version != INTERCHANGE_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        serde_json::from_value(raw).map_err(|e| Error::Document(e.to_string()))
    }
}
