use std::sync::LazyLock;

use indexmap::IndexMap;
use regex::Regex;

use crate::Iri;

static SAFE_LOCAL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_\-]*$").unwrap());
static SAFE_LABEL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([A-Za-z][A-Za-z0-9_\-]*)?$").unwrap());

/// Ordered prefix label → namespace map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap {
    entries: IndexMap<String, String>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers (or replaces) a prefix.
    pub fn insert(&mut self, label: impl Into<String>, namespace: impl Into<String>) {
        self.entries.insert(label.into(), namespace.into());
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.entries.get(label).map(String::as_str)
    }

    pub fn label_for(&self, namespace: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, ns)| ns.as_str() == namespace)
            .map(|(l, _)| l.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(l, n)| (l.as_str(), n.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Expands `label:local`.
    pub fn expand(&self, curie: &str) -> Option<Iri> {
        let (label, local) = curie.split_once(':')?;
        let ns = self.entries.get(label)?;
        Iri::new(format!("{ns}{local}")).ok()
    }

    /// Shortest-local-part abbreviation under a registered namespace, when
    /// the local part is a plain name that needs no escaping.
    pub fn abbreviate(&self, iri: &Iri) -> Option<String> {
        self.entries
            .iter()
            .filter(|(label, _)| SAFE_LABEL.is_match(label))
            .filter_map(|(label, ns)| {
                let local = iri.as_str().strip_prefix(ns.as_str())?;
                SAFE_LOCAL.is_match(local).then_some((label, local))
            })
            .min_by_key(|(_, local)| local.len())
            .map(|(label, local)| format!("{label}:{local}"))
    }

    /// A label derived from the namespace's last path segment, made unique
    /// within this map (`testconfig`, `testconfig1`, ...). Reuses the
    /// existing label when the namespace is already registered.
    pub fn register_derived(&mut self, namespace: &str) -> String {
        if let Some(label) = self.label_for(namespace) {
            return label.to_string();
        }
        let trimmed = namespace.trim_end_matches(['#', '/']);
        let segment = trimmed.rsplit(['/', '#', ':']).next().unwrap_or("");
        let mut base: String = segment
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if base.is_empty() || !base.starts_with(|c: char| c.is_ascii_alphabetic()) {
            base = format!("ns{base}");
        }
        let mut label = base.clone();
        let mut n = 1;
        while self.entries.contains_key(&label) {
            label = format!("{base}{n}");
            n += 1;
        }
        self.insert(label.clone(), namespace);
        label
    }
}

impl<L: Into<String>, N: Into<String>> FromIterator<(L, N)> for PrefixMap {
    fn from_iter<T: IntoIterator<Item = (L, N)>>(iter: T) -> Self {
        let mut map = PrefixMap::new();
        for (l, n) in iter {
            map.insert(l, n);
        }
        map
    }
}
