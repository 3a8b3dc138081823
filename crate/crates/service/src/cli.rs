//! The `ontoquery` command line.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use ontoquery_core::pathfind::PathConfig;
use ontoquery_core::sparqlgen::{QueryType, RuntimeConstraintValue};
use ontoquery_core::{Connection, Document, OntologyInfo};
use ontoquery_rdf::{parse_turtle, serialize_turtle, Iri, PrefixMap, Term};
use ontoquery_sparql::ResultTable;

use crate::jobs::JobResult;
use crate::persist::PersistentStore;
use crate::service::{EndpointResolver, ExecuteOptions, FixedEndpoint, NewNodegroup, RemoteEndpoints, Service};
use crate::store::{DirectoryStore, GraphStore, NodegroupStore};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "ontoquery", version, about = "Build, run and store nodegroup queries; ingest CSV")]
pub struct Cli {
    /// Connection file (JSON: name, modelEndpoints, dataEndpoints, domainRegex)
    #[arg(long, global = true)]
    pub connection: Option<PathBuf>,

    /// Run against an in-process store kept in this directory. The first
    /// connection given is remembered there.
    #[arg(long, global = true)]
    pub embedded: Option<PathBuf>,

    /// Read the ontology from this Turtle file instead of the model endpoints
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,

    /// Keep stored nodegroups in this graph of the data endpoint
    #[arg(long, global = true)]
    pub store_graph: Option<String>,

    /// Keep stored nodegroups as JSON files in this directory
    #[arg(long, global = true)]
    pub store_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct QueryArgs {
    /// select, count, ask, construct, delete or insert
    #[arg(long = "type", default_value = "select")]
    pub query_type: String,

    /// Runtime constraint, `id=op:value[,value]`; repeatable
    #[arg(long = "constraint")]
    pub constraints: Vec<String>,

    /// Replace the nodegroup's limit
    #[arg(long)]
    pub limit: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a Turtle ontology into a model graph
    LoadModel {
        ttl: PathBuf,
        /// Target graph; defaults to the connection's first model graph
        #[arg(long)]
        graph: Option<String>,
    },
    /// Print the SPARQL for a nodegroup document
    Generate {
        nodegroup: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Run a nodegroup document or a stored nodegroup
    Execute {
        nodegroup: Option<PathBuf>,
        /// Name of a stored nodegroup
        #[arg(long, conflicts_with = "nodegroup")]
        id: Option<String>,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Ingest CSV: `ingest --id name data.csv` or `ingest ng.json data.csv`
    Ingest {
        #[arg(num_args = 1..=2, required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        id: Option<String>,
    },
    /// Ranked paths connecting a class to an anchor class
    Pathfind {
        /// Anchor class (IRI, prefix:name or unique local name)
        #[arg(long)]
        from: String,
        /// Class to reach
        #[arg(long)]
        to: String,
        #[arg(long)]
        max_length: Option<usize>,
        /// Keep paths at most this many hops longer than the shortest
        #[arg(long)]
        extra_depth: Option<usize>,
    },
    /// Values the target id takes under the rest of the nodegroup
    SuggestValues {
        nodegroup: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Manage stored nodegroups
    Store {
        #[command(subcommand)]
        op: StoreCommand,
    },
    /// Serve the REST API
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Directory of static files served next to the API
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum StoreCommand {
    Put {
        nodegroup: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, default_value = "")]
        comments: String,
        #[arg(long, default_value = "")]
        creator: String,
        /// Replace an existing nodegroup of the same name
        #[arg(long)]
        overwrite: bool,
    },
    Get {
        id: String,
    },
    List,
    Delete {
        id: String,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::BadRequest(format!("{}: {e}", path.display())))
}

fn read_document(path: &Path) -> Result<Document> {
    Document::parse_unchecked(&read(path)?).map_err(|e| Error::BadRequest(format!("{}: {e}", path.display())))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Internal(e.to_string())
}

fn cell(t: Option<&Term>) -> &str {
    t.map_or("", Term::str_value)
}

pub fn write_table(out: &mut dyn Write, table: &ResultTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.columns.iter().map(|c| c.trim_start_matches('?')))
        .map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|t| cell(t.as_ref()))).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn write_result(out: &mut dyn Write, result: &JobResult) -> Result<()> {
    match result {
        JobResult::Table(t) => write_table(out, t),
        JobResult::Boolean(b) => write_out(out, &b.to_string()),
        JobResult::Graph(g) => write_out(out, &serialize_turtle(g, &PrefixMap::new())),
        JobResult::Update => Ok(()),
        JobResult::Ingest(r) => {
            let text = serde_json::to_string_pretty(r).map_err(|e| Error::Internal(e.to_string()))?;
            write_out(out, &text)
        }
    }
}

fn options(q: &QueryArgs) -> Result<ExecuteOptions> {
    Ok(ExecuteOptions {
        query_type: Some(q.query_type.parse::<QueryType>()?),
        runtime_constraints: q
            .constraints
            .iter()
            .map(|c| c.parse::<RuntimeConstraintValue>())
            .collect::<ontoquery_core::Result<_>>()?,
        limit_override: q.limit,
    })
}

/// `prefix:name` with a prefix derived from a class namespace, a full IRI,
/// or a local name shared by exactly one class.
pub fn resolve_class(oinfo: &OntologyInfo, name: &str) -> Result<String> {
    if oinfo.contains_class(name) {
        return Ok(name.to_string());
    }
    let mut prefixes = PrefixMap::new();
    for c in oinfo.classes.keys() {
        prefixes.register_derived(c.namespace());
    }
    if let Some(iri) = prefixes.expand(name) {
        if oinfo.contains_class(iri.as_str()) {
            return Ok(iri.as_str().to_string());
        }
    }
    let local = name.rsplit(':').next().unwrap_or(name);
    let matches: Vec<&Iri> = oinfo.classes.keys().filter(|c| c.local_name() == local).collect();
    match matches.as_slice() {
        [one] => Ok(one.as_str().to_string()),
        [] => Err(Error::BadRequest(format!("no class {name}"))),
        _ => Err(Error::BadRequest(format!("class name {name} is ambiguous"))),
    }
}

struct Setup {
    service: Service,
    connection: Option<Connection>,
}

fn setup(cli: &Cli) -> Result<Setup> {
    let mut connection = match &cli.connection {
        Some(path) => Some(Connection::from_json(&read(path)?)?),
        None => None,
    };
    let resolver: Arc<dyn EndpointResolver> = match &cli.embedded {
        Some(dir) => {
            let default_conn = dir.join("connection.json");
            match (&connection, default_conn.exists(), &cli.connection) {
                (None, true, _) => connection = Some(Connection::from_json(&read(&default_conn)?)?),
                (Some(_), false, Some(path)) => {
                    fs::create_dir_all(dir)?;
                    fs::copy(path, &default_conn)?;
                }
                _ => {}
            }
            Arc::new(FixedEndpoint(Arc::new(PersistentStore::open(dir)?)))
        }
        None => Arc::new(RemoteEndpoints),
    };
    let store: Arc<dyn NodegroupStore> = match (&cli.store_graph, &cli.store_dir) {
        (Some(graph), _) => {
            let conn = connection
                .as_ref()
                .ok_or_else(|| Error::BadRequest("--store-graph needs a connection".into()))?;
            Arc::new(GraphStore::new(resolver.resolve(conn)?, Iri::new(graph.as_str())?))
        }
        (None, Some(dir)) => Arc::new(DirectoryStore::open(dir)?),
        (None, None) => {
            let dir = cli.embedded.as_ref().map_or_else(|| PathBuf::from("nodegroups"), |d| d.join("nodegroups"));
            Arc::new(DirectoryStore::open(dir)?)
        }
    };
    let mut builder = Service::builder(resolver, store);
    if let Some(conn) = &connection {
        builder = builder.connection(conn.clone());
    }
    if let Some(model) = &cli.model {
        let conn = connection
            .as_ref()
            .ok_or_else(|| Error::BadRequest("--model needs a connection for its domain".into()))?;
        let graph = parse_turtle(&read(model)?, None)?;
        builder = builder.ontology(OntologyInfo::load_from_graph(&graph, &conn.domain_regex)?);
    }
    Ok(Setup {
        service: builder.build(),
        connection,
    })
}

/// Runs the parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let Setup { service: svc, connection } = setup(&cli)?;
    let conn = |doc: Option<&Document>| match doc {
        Some(d) => svc.document_connection(d, connection.as_ref()),
        None => svc.connection(connection.as_ref()),
    };
    match cli.command {
        Command::LoadModel { ttl, graph } => {
            let graph = graph.map(Iri::new).transpose()?;
            let n = svc.load_model(&conn(None)?, graph, &read(&ttl)?)?;
            eprintln!("loaded {n} triples");
        }
        Command::Generate { nodegroup, query } => {
            let doc = read_document(&nodegroup)?;
            let q = svc.generate(&doc, &conn(Some(&doc))?, &options(&query)?)?;
            write_out(out, &q.text)?;
        }
        Command::Execute { nodegroup, id, query } => {
            let (doc, c) = match (nodegroup, id) {
                (Some(path), None) => {
                    let doc = read_document(&path)?;
                    let c = conn(Some(&doc))?;
                    (doc, c)
                }
                (None, Some(id)) => {
                    let sn = svc.store_get(&id)?;
                    (sn.document, sn.connection)
                }
                _ => return Err(Error::BadRequest("give a nodegroup file or --id".into())),
            };
            write_result(out, &svc.execute_document(&doc, &c, &options(&query)?)?)?;
        }
        Command::Ingest { files, id } => {
            let (doc, c, csv) = match (id, files.as_slice()) {
                (Some(id), [csv]) => {
                    let sn = svc.store_get(&id)?;
                    (sn.document, sn.connection, read(csv)?)
                }
                (None, [ng, csv]) => {
                    let doc = read_document(ng)?;
                    let c = conn(Some(&doc))?;
                    (doc, c, read(csv)?)
                }
                _ => return Err(Error::BadRequest("use `ingest --id name data.csv` or `ingest ng.json data.csv`".into())),
            };
            let report = svc.ingest_document(&doc, &c, &csv, None)?;
            if !report.row_errors.is_empty() {
                eprintln!("{} of {} rows failed", report.row_errors.len(), report.rows_total);
            }
            write_result(out, &JobResult::Ingest(report))?;
        }
        Command::Pathfind {
            from,
            to,
            max_length,
            extra_depth,
        } => {
            let c = conn(None)?;
            let oinfo = svc.ontology(&c)?;
            let mut cfg = PathConfig::default();
            cfg.max_length = max_length.unwrap_or(cfg.max_length);
            cfg.extra_depth_m = extra_depth.unwrap_or(cfg.extra_depth_m);
            let from = resolve_class(&oinfo, &from)?;
            let to = resolve_class(&oinfo, &to)?;
            let paths = svc.find_paths(&c, &to, &[from], &cfg)?;
            if paths.is_empty() {
                eprintln!("no path");
            }
            for p in paths {
                write_out(out, &p.describe())?;
            }
        }
        Command::SuggestValues { nodegroup, target } => {
            let doc = read_document(&nodegroup)?;
            let target = if target.starts_with('?') { target } else { format!("?{target}") };
            let values = svc.suggest_values(&doc, &conn(Some(&doc))?, &target)?;
            let mut table = ResultTable::new(vec![target]);
            table.rows = values.into_iter().map(|v| vec![Some(v)]).collect();
            write_table(out, &table)?;
        }
        Command::Store { op } => match op {
            StoreCommand::Put {
                nodegroup,
                id,
                comments,
                creator,
                overwrite,
            } => {
                let document = read_document(&nodegroup)?;
                let new = NewNodegroup {
                    id,
                    comments,
                    creator,
                    document,
                    connection: connection.clone(),
                };
                svc.store_put(new, overwrite)?;
            }
            StoreCommand::Get { id } => {
                let sn = svc.store_get(&id)?;
                write_out(out, &serde_json::to_string_pretty(&sn).map_err(|e| Error::Internal(e.to_string()))?)?;
            }
            StoreCommand::List => {
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record(["id", "comments", "creator", "creationDate"]).map_err(csv_error)?;
                for e in svc.store_list()? {
                    let date = e.creation_date.to_string();
                    w.write_record([e.id.as_str(), &e.comments, &e.creator, &date]).map_err(csv_error)?;
                }
                w.flush()?;
            }
            StoreCommand::Delete { id } => svc.store_delete(&id)?,
        },
        Command::Serve { port, bind, ui } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::rest::serve(svc, SocketAddr::new(bind, port), ui))?;
        }
    }
    Ok(())
}

/// Parses `args` and runs; returns the process exit code. Usage and input
/// errors give 1, failures of the environment 2.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_user_error() {
                1
            } else {
                2
            }
        }
    }
}
