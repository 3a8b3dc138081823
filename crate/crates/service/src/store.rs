//! Named nodegroup persistence.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::NaiveDate;
use ontoquery_core::{Connection, Document};
use ontoquery_rdf::vocab::{rdf, xsd};
use ontoquery_rdf::{Iri, Literal, Term, Triple};
use ontoquery_sparql::SparqlEndpoint;
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoredNodegroup {
    pub id: String,
    #[serde(default)]
    pub comments: String,
    #[serde(default)]
    pub creator: String,
    pub creation_date: NaiveDate,
    pub document: Document,
    pub connection: Connection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoreEntry {
    pub id: String,
    pub comments: String,
    pub creator: String,
    pub creation_date: NaiveDate,
}

impl From<&StoredNodegroup> for StoreEntry {
    fn from(sn: &StoredNodegroup) -> Self {
        StoreEntry {
            id: sn.id.clone(),
            comments: sn.comments.clone(),
            creator: sn.creator.clone(),
            creation_date: sn.creation_date,
        }
    }
}

pub trait NodegroupStore: Send + Sync {
    /// Fails with `Conflict` when `id` exists and `overwrite` is false.
    fn put(&self, sn: &StoredNodegroup, overwrite: bool) -> Result<()>;
    fn get(&self, id: &str) -> Result<StoredNodegroup>;
    /// Sorted by id.
    fn list(&self) -> Result<Vec<StoreEntry>>;
    fn delete(&self, id: &str) -> Result<()>;
}

fn check_id(id: &str) -> Result<()> {
    if id.trim().is_empty() {
        Err(Error::BadRequest("nodegroup id must not be empty".into()))
    } else {
        Ok(())
    }
}

fn unknown(id: &str) -> Error {
    Error::NotFound(format!("no stored nodegroup {id:?}"))
}

fn duplicate(id: &str) -> Error {
    Error::Conflict(format!("nodegroup {id:?} already exists"))
}

const FILE_SAFE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.');

/// One JSON file per nodegroup, named by the percent-encoded id.
#[derive(Debug)]
pub struct DirectoryStore {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl DirectoryStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DirectoryStore { dir, lock: Mutex::new(()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        let name = utf8_percent_encode(id, FILE_SAFE).to_string();
        // leading dots would hide the file or escape the directory
        let name = name.replacen('.', "%2E", usize::from(name.starts_with('.')));
        self.dir.join(format!("{name}.json"))
    }

    fn read(&self, path: &Path) -> Result<StoredNodegroup> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Internal(format!("{}: {e}", path.display())))
    }
}

impl NodegroupStore for DirectoryStore {
    fn put(&self, sn: &StoredNodegroup, overwrite: bool) -> Result<()> {
        check_id(&sn.id)?;
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.path(&sn.id);
        if path.exists() && !overwrite {
            return Err(duplicate(&sn.id));
        }
        let text = serde_json::to_string_pretty(sn).map_err(|e| Error::Internal(e.to_string()))?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn get(&self, id: &str) -> Result<StoredNodegroup> {
        let path = self.path(id);
        if !path.exists() {
            return Err(unknown(id));
        }
        self.read(&path)
    }

    fn list(&self) -> Result<Vec<StoreEntry>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            out.push(StoreEntry::from(&self.read(&path)?));
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    fn delete(&self, id: &str) -> Result<()> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.path(id);
        if !path.exists() {
            return Err(unknown(id));
        }
        fs::remove_file(path)?;
        Ok(())
    }
}

/// Vocabulary of the graph-backed store.
pub mod vocab {
    pub const NS: &str = "http://ontoquery/store#";
    pub const STORED_NODEGROUP: &str = "http://ontoquery/store#StoredNodegroup";
    pub const ID: &str = "http://ontoquery/store#id";
    pub const COMMENTS: &str = "http://ontoquery/store#comments";
    pub const CREATOR: &str = "http://ontoquery/store#creator";
    pub const CREATION_DATE: &str = "http://ontoquery/store#creationDate";
    pub const DOCUMENT: &str = "http://ontoquery/store#document";
    pub const CONNECTION: &str = "http://ontoquery/store#connection";
}

/// Each nodegroup is an instance in a dedicated graph, with the document
/// and connection held as JSON string literals.
pub struct GraphStore {
    endpoint: Arc<dyn SparqlEndpoint>,
    graph: Iri,
    lock: Mutex<()>,
}

impl GraphStore {
    pub fn new(endpoint: Arc<dyn SparqlEndpoint>, graph: Iri) -> Self {
        GraphStore {
            endpoint,
            graph,
            lock: Mutex::new(()),
        }
    }

    pub fn graph(&self) -> &Iri {
        &self.graph
    }

    fn subject(id: &str) -> Iri {
        Iri::new_unchecked(format!("{}ng_{}", vocab::NS, utf8_percent_encode(id, NON_ALPHANUMERIC)))
    }

    fn exists(&self, id: &str) -> Result<bool> {
        let q = format!("ask FROM {} where {{ {} ?p ?o }}", self.graph, Self::subject(id));
        Ok(self.endpoint.query(&q)?.as_bool()?)
    }

    fn remove(&self, id: &str) -> Result<()> {
        let s = Self::subject(id);
        let q = format!("WITH {} DELETE {{ {s} ?p ?o }} WHERE {{ {s} ?p ?o }}", self.graph);
        Ok(self.endpoint.update(&q)?)
    }

    fn triples(sn: &StoredNodegroup) -> Result<Vec<Triple>> {
        let s = Self::subject(&sn.id);
        let iri = Iri::new_unchecked;
        let string = |v: &str| Term::Literal(Literal::string(v));
        let date = Literal::typed(sn.creation_date.format("%Y-%m-%d").to_string(), iri(xsd::DATE));
        let rows: Vec<(&str, Term)> = vec![
            (rdf::TYPE, Term::Iri(iri(vocab::STORED_NODEGROUP))),
            (vocab::ID, string(&sn.id)),
            (vocab::COMMENTS, string(&sn.comments)),
            (vocab::CREATOR, string(&sn.creator)),
            (vocab::CREATION_DATE, Term::Literal(date)),
            (vocab::DOCUMENT, string(&to_json(&sn.document)?)),
            (vocab::CONNECTION, string(&to_json(&sn.connection)?)),
        ];
        rows.into_iter()
            .map(|(p, o)| Triple::new(s.clone(), iri(p), o).map_err(Error::from))
            .collect()
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Internal(e.to_string()))
}

fn literal<'a>(row: &'a [Option<Term>], i: usize, what: &str) -> Result<&'a str> {
    match row.get(i).and_then(Option::as_ref) {
        Some(Term::Literal(l)) => Ok(l.lexical()),
        _ => Err(Error::Internal(format!("stored nodegroup lacks {what}"))),
    }
}

fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| Error::Internal(format!("bad creation date {s:?}: {e}")))
}

impl NodegroupStore for GraphStore {
    fn put(&self, sn: &StoredNodegroup, overwrite: bool) -> Result<()> {
        check_id(&sn.id)?;
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        if self.exists(&sn.id)? {
            if !overwrite {
                return Err(duplicate(&sn.id));
            }
            self.remove(&sn.id)?;
        }
        let mut text = format!("INSERT DATA {{ GRAPH {} {{\n", self.graph);
        for t in Self::triples(sn)? {
            text.push_str(&format!("  {t}\n"));
        }
        text.push_str("} }");
        Ok(self.endpoint.update(&text)?)
    }

    fn get(&self, id: &str) -> Result<StoredNodegroup> {
        let s = Self::subject(id);
        let q = format!(
            "select ?comments ?creator ?date ?document ?connection FROM {g} where {{ {s} <{}> ?comments . {s} <{}> ?creator . {s} <{}> ?date . {s} <{}> ?document . {s} <{}> ?connection }}",
            vocab::COMMENTS,
            vocab::CREATOR,
            vocab::CREATION_DATE,
            vocab::DOCUMENT,
            vocab::CONNECTION,
            g = self.graph,
        );
        let table = self.endpoint.query(&q)?.into_table()?;
        let row = table.rows.first().ok_or_else(|| unknown(id))?;
        let document = Document::parse_unchecked(literal(row, 3, "document")?)
            .map_err(|e| Error::Internal(format!("stored document {id:?}: {e}")))?;
        let connection = Connection::from_json(literal(row, 4, "connection")?)
            .map_err(|e| Error::Internal(format!("stored connection {id:?}: {e}")))?;
        Ok(StoredNodegroup {
            id: id.to_string(),
            comments: literal(row, 0, "comments")?.to_string(),
            creator: literal(row, 1, "creator")?.to_string(),
            creation_date: parse_date(literal(row, 2, "creation date")?)?,
            document,
            connection,
        })
    }

    fn list(&self) -> Result<Vec<StoreEntry>> {
        let q = format!(
            "select ?id ?comments ?creator ?date FROM {} where {{ ?s <{}> <{}> . ?s <{}> ?id . ?s <{}> ?comments . ?s <{}> ?creator . ?s <{}> ?date }}",
            self.graph,
            rdf::TYPE,
            vocab::STORED_NODEGROUP,
            vocab::ID,
            vocab::COMMENTS,
            vocab::CREATOR,
            vocab::CREATION_DATE,
        );
        let table = self.endpoint.query(&q)?.into_table()?;
        let mut out = table
            .rows
            .iter()
            .map(|row| {
                Ok(StoreEntry {
                    id: literal(row, 0, "id")?.to_string(),
                    comments: literal(row, 1, "comments")?.to_string(),
                    creator: literal(row, 2, "creator")?.to_string(),
                    creation_date: parse_date(literal(row, 3, "creation date")?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out.dedup_by(|a, b| a.id == b.id);
        Ok(out)
    }

    fn delete(&self, id: &str) -> Result<()> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        if !self.exists(id)? {
            return Err(unknown(id));
        }
        self.remove(id)
    }
}
