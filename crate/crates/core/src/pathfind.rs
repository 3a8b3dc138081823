//! Connection paths between a new class and classes already in a nodegroup.
//!
//! Uniform-cost search over the object-property graph: every link costs 1,
//! edges are walked in both directions, and paths never revisit a class.
//! Once the shortest hit of length `n` is found the search finishes every
//! path up to `n + extra_depth_m` and stops.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use ontoquery_rdf::Iri;
use serde::{Deserialize, Serialize};

use crate::oinfo::{OntologyInfo, PropertyKind};
use crate::{Error, Result};

/// One object-property link in its declared direction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Hop {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Iri,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AnchorEnd {
    #[default]
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Path {
    /// First class of the walk; needed to orient hops and for zero-length
    /// paths.
    pub start_class: Iri,
    pub hops: Vec<Hop>,
    #[serde(default)]
    pub anchor_end: AnchorEnd,
}

impl Path {
    pub fn zero(class: Iri) -> Self {
        Path {
            start_class: class,
            hops: Vec::new(),
            anchor_end: AnchorEnd::Start,
        }
    }

    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    /// Classes visited, from `start_class`, with whether each hop is walked
    /// forward (subject to object). `None` when hops do not chain.
    pub fn walk(&self) -> Option<(Vec<Iri>, Vec<bool>)> {
        let mut classes = vec![self.start_class.clone()];
        let mut forward = Vec::with_capacity(self.hops.len());
        for hop in &self.hops {
            let cur = classes.last().unwrap();
            if &hop.subject == cur {
                forward.push(true);
                classes.push(hop.object.clone());
            } else if &hop.object == cur {
                forward.push(false);
                classes.push(hop.subject.clone());
            } else {
                return None;
            }
        }
        Some((classes, forward))
    }

    pub fn end_class(&self) -> Iri {
        self.walk()
            .and_then(|(c, _)| c.last().cloned())
            .unwrap_or_else(|| self.start_class.clone())
    }

    /// The class that attaches to the existing nodegroup.
    pub fn anchor_class(&self) -> Iri {
        match self.anchor_end {
            AnchorEnd::Start => self.start_class.clone(),
            AnchorEnd::End => self.end_class(),
        }
    }

    /// `Test -dataLayer-> Layer <-p- X` style rendering with local names.
    pub fn describe(&self) -> String {
        let mut out = self.start_class.local_name().to_string();
        if let Some((classes, forward)) = self.walk() {
            for ((hop, fwd), next) in self.hops.iter().zip(forward).zip(classes.iter().skip(1)) {
                if fwd {
                    out.push_str(&format!(" -{}-> {}", hop.predicate.local_name(), next.local_name()));
                } else {
                    out.push_str(&format!(" <-{}- {}", hop.predicate.local_name(), next.local_name()));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct PathConfig {
    pub max_length: usize,
    pub time_budget_ms: u64,
    pub extra_depth_m: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            max_length: 10,
            time_budget_ms: 30_000,
            extra_depth_m: 2,
        }
    }
}

/// Directed class-to-class edges, expanded over subclasses at both ends.
#[derive(Debug, Clone, Default)]
pub struct EdgeIndex {
    classes: BTreeSet<Iri>,
    edges: BTreeSet<Hop>,
    /// class → (edge, neighbour) in either direction
    adjacent: BTreeMap<Iri, Vec<(Hop, Iri)>>,
}

impl EdgeIndex {
    pub fn build(oinfo: &OntologyInfo) -> Self {
        let with_subs = |c: &Iri| -> Vec<Iri> {
            let mut v = vec![c.clone()];
            v.extend(oinfo.subclasses_of(c.as_str(), true).unwrap_or_default());
            v
        };
        let mut edges = BTreeSet::new();
        for p in oinfo.properties.values().filter(|p| p.kind == PropertyKind::Object) {
            for d in &p.domain {
                for r in &p.range {
                    for ds in with_subs(d) {
                        for rs in with_subs(r) {
                            edges.insert(Hop {
                                subject: ds.clone(),
                                predicate: p.iri.clone(),
                                object: rs,
                            });
                        }
                    }
                }
            }
        }
        let mut adjacent: BTreeMap<Iri, Vec<(Hop, Iri)>> = BTreeMap::new();
        for e in &edges {
            if e.subject == e.object {
                continue;
            }
            adjacent.entry(e.subject.clone()).or_default().push((e.clone(), e.object.clone()));
            adjacent.entry(e.object.clone()).or_default().push((e.clone(), e.subject.clone()));
        }
        EdgeIndex {
            classes: oinfo.classes.keys().cloned().collect(),
            edges,
            adjacent,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = &Hop> {
        self.edges.iter()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, hop: &Hop) -> bool {
        self.edges.contains(hop)
    }

    /// Edges touching `class`, paired with the class at the other end.
    pub fn neighbours(&self, class: &Iri) -> &[(Hop, Iri)] {
        self.adjacent.get(class).map_or(&[], Vec::as_slice)
    }

    fn check_class(&self, c: &Iri) -> Result<()> {
        if self.classes.contains(c) {
            Ok(())
        } else {
            Err(Error::UnknownClass(c.as_str().to_string()))
        }
    }
}

struct Partial {
    classes: Vec<Iri>,
    hops: Vec<Hop>,
}

/// Ranked paths from any anchor class to `new_class`.
pub fn find_paths(index: &EdgeIndex, new_class: &Iri, anchors: &[Iri], cfg: &PathConfig) -> Result<Vec<Path>> {
    index.check_class(new_class)?;
    for a in anchors {
        index.check_class(a)?;
    }
    let deadline = Instant::now() + Duration::from_millis(cfg.time_budget_ms);
    let mut found: BTreeSet<(usize, Vec<Hop>, Iri)> = BTreeSet::new();
    let mut limit = cfg.max_length;
    let mut frontier: Vec<Partial> = Vec::new();
    let starts: BTreeSet<&Iri> = anchors.iter().collect();
    for a in starts {
        if a == new_class {
            found.insert((0, Vec::new(), a.clone()));
            limit = limit.min(cfg.extra_depth_m);
        } else {
            frontier.push(Partial {
                classes: vec![a.clone()],
                hops: Vec::new(),
            });
        }
    }
    let mut depth = 0;
    'search: while depth < limit && !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for partial in frontier {
            if Instant::now() >= deadline {
                break 'search;
            }
            let cur = partial.classes.last().unwrap();
            for (hop, other) in index.neighbours(cur) {
                if partial.classes.contains(other) {
                    continue;
                }
                let mut hops = partial.hops.clone();
                hops.push(hop.clone());
                if other == new_class {
                    if found.is_empty() {
                        limit = limit.min(depth + cfg.extra_depth_m);
                    }
                    found.insert((depth, hops, partial.classes[0].clone()));
                } else {
                    let mut classes = partial.classes.clone();
                    classes.push(other.clone());
                    next.push(Partial { classes, hops });
                }
            }
        }
        frontier = next;
    }
    Ok(found
        .into_iter()
        .map(|(_, hops, start)| Path {
            start_class: start,
            hops,
            anchor_end: AnchorEnd::Start,
        })
        .collect())
}
