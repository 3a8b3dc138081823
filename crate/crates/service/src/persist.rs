//! An embedded store mirrored to a directory of Turtle files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use ontoquery_rdf::{serialize_turtle, Iri, PrefixMap};
use ontoquery_sparql::{EmbeddedStore, QueryResult, SparqlEndpoint};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const INDEX: &str = "graphs.json";

#[derive(Debug, Serialize, Deserialize)]
struct IndexEntry {
    graph: Iri,
    file: String,
}

/// Graphs live in memory and are rewritten to `dir` after every update.
/// `dir/graphs.json` maps graph names to their Turtle files.
#[derive(Debug)]
pub struct PersistentStore {
    store: Arc<EmbeddedStore>,
    dir: PathBuf,
    lock: Mutex<()>,
}

impl PersistentStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let store = Arc::new(EmbeddedStore::new());
        let index_path = dir.join(INDEX);
        if index_path.exists() {
            let index: Vec<IndexEntry> = serde_json::from_str(&fs::read_to_string(&index_path)?)
                .map_err(|e| Error::Internal(format!("{}: {e}", index_path.display())))?;
            for entry in index {
                let text = fs::read_to_string(dir.join(&entry.file))?;
                store
                    .load_turtle(&entry.graph, &text)
                    .map_err(|e| Error::Internal(format!("{}: {e}", entry.file)))?;
            }
        }
        Ok(PersistentStore {
            store,
            dir,
            lock: Mutex::new(()),
        })
    }

    pub fn store(&self) -> &Arc<EmbeddedStore> {
        &self.store
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn save(&self) -> Result<()> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut index = Vec::new();
        for (i, graph) in self.store.graph_names().into_iter().enumerate() {
            let file = format!("graph{i}.ttl");
            write_atomic(&self.dir.join(&file), &serialize_turtle(&self.store.graph(&graph), &PrefixMap::new()))?;
            index.push(IndexEntry { graph, file });
        }
        let text = serde_json::to_string_pretty(&index).map_err(|e| Error::Internal(e.to_string()))?;
        write_atomic(&self.dir.join(INDEX), &text)?;
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            if name.starts_with("graph") && name.ends_with(".ttl") && !index.iter().any(|e| e.file == name) {
                fs::remove_file(path)?;
            }
        }
        Ok(())
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)?;
    fs::rename(tmp, path)?;
    Ok(())
}

impl SparqlEndpoint for PersistentStore {
    fn query(&self, text: &str) -> ontoquery_sparql::Result<QueryResult> {
        self.store.query(text)
    }

    fn update(&self, text: &str) -> ontoquery_sparql::Result<()> {
        self.store.update(text)?;
        self.save().map_err(|e| ontoquery_sparql::Error::Transport {
            url: self.dir.display().to_string(),
            message: e.to_string(),
        })
    }

    fn describe(&self) -> String {
        format!("embedded store at {}", self.dir.display())
    }
}
