//! Operations behind the REST routes and the command line.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use ontoquery_core::ingest::{ingest_csv_with_progress, IngestOptions, IngestReport};
use ontoquery_core::pathfind::{find_paths, EdgeIndex, Path, PathConfig};
use ontoquery_core::sparqlgen::{
    apply_runtime_constraints, generate, suggest_values, GeneratedQuery, QueryType, RuntimeConstraintValue,
};
use ontoquery_core::{Connection, Document, OntologyInfo};
use ontoquery_rdf::{parse_turtle, Iri, Term, UuidMinter};
use ontoquery_sparql::{parse_query, BasicAuth, HttpEndpoint, QueryResult, SparqlEndpoint};

use crate::jobs::{JobRegistry, JobResult, Progress};
use crate::store::{NodegroupStore, StoreEntry, StoredNodegroup};
use crate::{Error, Result};

/// Maps a connection to the endpoint that answers for it.
pub trait EndpointResolver: Send + Sync {
    fn resolve(&self, conn: &Connection) -> Result<Arc<dyn SparqlEndpoint>>;
}

/// Every connection goes to one endpoint, typically an embedded store.
pub struct FixedEndpoint(pub Arc<dyn SparqlEndpoint>);

impl EndpointResolver for FixedEndpoint {
    fn resolve(&self, _conn: &Connection) -> Result<Arc<dyn SparqlEndpoint>> {
        Ok(self.0.clone())
    }
}

/// SPARQL protocol endpoint at the first data endpoint's server URL.
pub struct RemoteEndpoints;

impl EndpointResolver for RemoteEndpoints {
    fn resolve(&self, conn: &Connection) -> Result<Arc<dyn SparqlEndpoint>> {
        let ep = conn
            .data_endpoints
            .first()
            .ok_or_else(|| Error::BadRequest("connection has no data endpoint".into()))?;
        let auth = conn.auth.as_ref().map(|c| BasicAuth {
            user: c.user.clone(),
            password: c.password.clone(),
        });
        Ok(Arc::new(HttpEndpoint::new(ep.server_url.clone()).with_auth(auth)))
    }
}

/// What to run a nodegroup as.
#[derive(Debug, Clone, Default)]
pub struct ExecuteOptions {
    pub query_type: Option<QueryType>,
    pub runtime_constraints: Vec<RuntimeConstraintValue>,
    pub limit_override: Option<u64>,
}

/// A nodegroup to be stored, before it gets a creation date.
#[derive(Debug, Clone)]
pub struct NewNodegroup {
    pub id: String,
    pub comments: String,
    pub creator: String,
    pub document: Document,
    pub connection: Option<Connection>,
}

struct Inner {
    connection: Option<Connection>,
    resolver: Arc<dyn EndpointResolver>,
    store: Arc<dyn NodegroupStore>,
    jobs: JobRegistry,
    fixed_ontology: Option<Arc<OntologyInfo>>,
    ontologies: Mutex<HashMap<String, Arc<OntologyInfo>>>,
    minter: Mutex<UuidMinter>,
    ingest_options: IngestOptions,
}

#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

pub struct ServiceBuilder {
    connection: Option<Connection>,
    resolver: Arc<dyn EndpointResolver>,
    store: Arc<dyn NodegroupStore>,
    jobs: JobRegistry,
    ontology: Option<Arc<OntologyInfo>>,
    minter: UuidMinter,
    ingest_options: IngestOptions,
}

impl ServiceBuilder {
    /// Used wherever a request names no connection.
    pub fn connection(mut self, conn: Connection) -> Self {
        self.connection = Some(conn);
        self
    }

    /// Ontology used for every connection instead of loading it from the
    /// model endpoints.
    pub fn ontology(mut self, oinfo: OntologyInfo) -> Self {
        self.ontology = Some(Arc::new(oinfo));
        self
    }

    pub fn jobs(mut self, jobs: JobRegistry) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn minter(mut self, minter: UuidMinter) -> Self {
        self.minter = minter;
        self
    }

    pub fn ingest_options(mut self, opts: IngestOptions) -> Self {
        self.ingest_options = opts;
        self
    }

    pub fn build(self) -> Service {
        Service {
            inner: Arc::new(Inner {
                connection: self.connection,
                resolver: self.resolver,
                store: self.store,
                jobs: self.jobs,
                fixed_ontology: self.ontology,
                ontologies: Mutex::default(),
                minter: Mutex::new(self.minter),
                ingest_options: self.ingest_options,
            }),
        }
    }
}

fn result_of(result: QueryResult) -> JobResult {
    match result {
        QueryResult::Solutions(t) => JobResult::Table(t),
        QueryResult::Boolean(b) => JobResult::Boolean(b),
        QueryResult::Graph(g) => JobResult::Graph(g),
    }
}

impl Service {
    pub fn builder(resolver: Arc<dyn EndpointResolver>, store: Arc<dyn NodegroupStore>) -> ServiceBuilder {
        ServiceBuilder {
            connection: None,
            resolver,
            store,
            jobs: JobRegistry::default(),
            ontology: None,
            minter: UuidMinter::from_env(),
            ingest_options: IngestOptions::default(),
        }
    }

    pub fn jobs(&self) -> &JobRegistry {
        &self.inner.jobs
    }

    pub fn store(&self) -> &dyn NodegroupStore {
        self.inner.store.as_ref()
    }

    /// `explicit`, else the configured default.
    pub fn connection(&self, explicit: Option<&Connection>) -> Result<Connection> {
        explicit
            .or(self.inner.connection.as_ref())
            .cloned()
            .ok_or_else(|| Error::BadRequest("no connection given and none configured".into()))
    }

    /// Connection for a document: its own, else the default.
    pub fn document_connection(&self, doc: &Document, explicit: Option<&Connection>) -> Result<Connection> {
        self.connection(explicit.or(doc.connection.as_ref()))
    }

    pub fn endpoint(&self, conn: &Connection) -> Result<Arc<dyn SparqlEndpoint>> {
        self.inner.resolver.resolve(conn)
    }

    pub fn ontology(&self, conn: &Connection) -> Result<Arc<OntologyInfo>> {
        if let Some(o) = &self.inner.fixed_ontology {
            return Ok(o.clone());
        }
        let key = serde_json::to_string(conn).map_err(|e| Error::Internal(e.to_string()))?;
        if let Some(o) = self.inner.ontologies.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(o.clone());
        }
        let oinfo = Arc::new(OntologyInfo::load_from_endpoints(conn, self.endpoint(conn)?.as_ref())?);
        self.inner
            .ontologies
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, oinfo.clone());
        Ok(oinfo)
    }

    /// Forgets cached ontologies so the next request reloads them.
    pub fn invalidate_ontologies(&self) {
        self.inner.ontologies.lock().unwrap_or_else(|e| e.into_inner()).clear();
    }

    /// Checks a document against the ontology of its connection.
    pub fn check_document(&self, doc: &Document, conn: &Connection) -> Result<Arc<OntologyInfo>> {
        let oinfo = self.ontology(conn)?;
        Document::parse(&doc.to_json(), &oinfo)?;
        doc.nodegroup.check(&oinfo)?;
        if let Some(spec) = &doc.import_spec {
            spec.validate(&doc.nodegroup, &oinfo)?;
        }
        Ok(oinfo)
    }

    // ---- nodegroup store -------------------------------------------------

    pub fn store_put(&self, new: NewNodegroup, overwrite: bool) -> Result<StoredNodegroup> {
        let conn = self.document_connection(&new.document, new.connection.as_ref())?;
        self.check_document(&new.document, &conn)?;
        let sn = StoredNodegroup {
            id: new.id,
            comments: new.comments,
            creator: new.creator,
            creation_date: chrono::Local::now().date_naive(),
            document: new.document,
            connection: conn,
        };
        self.inner.store.put(&sn, overwrite)?;
        Ok(sn)
    }

    pub fn store_get(&self, id: &str) -> Result<StoredNodegroup> {
        self.inner.store.get(id)
    }

    pub fn store_list(&self) -> Result<Vec<StoreEntry>> {
        self.inner.store.list()
    }

    pub fn store_delete(&self, id: &str) -> Result<()> {
        self.inner.store.delete(id)
    }

    // ---- queries ---------------------------------------------------------

    pub fn generate(&self, doc: &Document, conn: &Connection, opts: &ExecuteOptions) -> Result<GeneratedQuery> {
        let oinfo = self.ontology(conn)?;
        let mut ng = apply_runtime_constraints(&doc.nodegroup, &opts.runtime_constraints)?;
        if opts.limit_override.is_some() {
            ng.set_limit(opts.limit_override);
        }
        Ok(generate(opts.query_type.unwrap_or(QueryType::Select), &ng, conn, &oinfo)?)
    }

    /// Generates and runs a query synchronously.
    pub fn execute_document(&self, doc: &Document, conn: &Connection, opts: &ExecuteOptions) -> Result<JobResult> {
        let q = self.generate(doc, conn, opts)?;
        let endpoint = self.endpoint(conn)?;
        match q.query_type {
            QueryType::Delete | QueryType::Insert => {
                endpoint.update(&q.text)?;
                Ok(JobResult::Update)
            }
            _ => Ok(result_of(endpoint.query(&q.text)?)),
        }
    }

    /// Runs `doc` as a job.
    pub fn submit_execute(&self, doc: Document, conn: Connection, opts: ExecuteOptions) -> String {
        let svc = self.clone();
        self.inner.jobs.submit(move |progress| {
            progress.set(10);
            svc.execute_document(&doc, &conn, &opts)
        })
    }

    pub fn execute_by_id(&self, id: &str, opts: ExecuteOptions) -> Result<String> {
        let sn = self.inner.store.get(id)?;
        Ok(self.submit_execute(sn.document, sn.connection, opts))
    }

    // ---- ingestion -------------------------------------------------------

    pub fn ingest_document(&self, doc: &Document, conn: &Connection, csv: &str, progress: Option<&Progress>) -> Result<IngestReport> {
        let spec = doc
            .import_spec
            .as_ref()
            .ok_or_else(|| Error::BadRequest("nodegroup has no import spec".into()))?;
        let oinfo = self.ontology(conn)?;
        let endpoint = self.endpoint(conn)?;
        let mut minter = self.inner.minter.lock().unwrap_or_else(|e| e.into_inner());
        let mut report = |done, total| {
            if let Some(p) = progress {
                p.set_fraction(done, total);
            }
        };
        Ok(ingest_csv_with_progress(
            &doc.nodegroup,
            spec,
            csv,
            conn,
            &oinfo,
            endpoint.as_ref(),
            self.inner.ingest_options,
            &mut minter,
            &mut report,
        )?)
    }

    pub fn submit_ingest(&self, doc: Document, conn: Connection, csv: String) -> Result<String> {
        if doc.import_spec.is_none() {
            return Err(Error::BadRequest("nodegroup has no import spec".into()));
        }
        let svc = self.clone();
        Ok(self
            .inner
            .jobs
            .submit(move |progress| svc.ingest_document(&doc, &conn, &csv, Some(progress)).map(JobResult::Ingest)))
    }

    pub fn ingest_by_id(&self, id: &str, csv: String) -> Result<String> {
        let sn = self.inner.store.get(id)?;
        self.submit_ingest(sn.document, sn.connection, csv)
    }

    // ---- exploration -----------------------------------------------------

    pub fn find_paths(&self, conn: &Connection, class: &str, anchors: &[String], cfg: &PathConfig) -> Result<Vec<Path>> {
        let oinfo = self.ontology(conn)?;
        let index = EdgeIndex::build(&oinfo);
        let iri = |s: &str| Iri::new(s).map_err(Error::from);
        let anchors = anchors.iter().map(|a| iri(a)).collect::<Result<Vec<_>>>()?;
        Ok(find_paths(&index, &iri(class)?, &anchors, cfg)?)
    }

    pub fn suggest_values(&self, doc: &Document, conn: &Connection, target: &str) -> Result<Vec<Term>> {
        let oinfo = self.ontology(conn)?;
        let endpoint = self.endpoint(conn)?;
        Ok(suggest_values(&doc.nodegroup, target, conn, &oinfo, endpoint.as_ref())?)
    }

    // ---- store access ----------------------------------------------------

    /// Parses Turtle and inserts it into `graph`, by default the first
    /// model graph. Returns the number of triples sent.
    pub fn load_model(&self, conn: &Connection, graph: Option<Iri>, turtle: &str) -> Result<usize> {
        let graph = match graph {
            Some(g) => g,
            None => conn
                .model_graphs()
                .into_iter()
                .next()
                .ok_or_else(|| Error::BadRequest("connection has no model graph".into()))?,
        };
        let parsed = parse_turtle(turtle, None)?;
        let mut text = format!("INSERT DATA {{ GRAPH {graph} {{\n");
        for t in parsed.iter() {
            text.push_str(&format!("  {t}\n"));
        }
        text.push_str("} }");
        self.endpoint(conn)?.update(&text)?;
        self.invalidate_ontologies();
        Ok(parsed.len())
    }

    /// Runs SPARQL text as a query or an update, whichever it is.
    pub fn sparql(&self, conn: &Connection, text: &str) -> Result<JobResult> {
        let endpoint = self.endpoint(conn)?;
        let is_update = parse_query(text).map(|q| q.form.is_update()).unwrap_or(false);
        if is_update {
            endpoint.update(text)?;
            self.invalidate_ontologies();
            Ok(JobResult::Update)
        } else {
            Ok(result_of(endpoint.query(text)?))
        }
    }
}
