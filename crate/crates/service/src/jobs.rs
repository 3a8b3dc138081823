//! In-memory registry of asynchronous jobs, one worker thread each.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use ontoquery_core::ingest::IngestReport;
use ontoquery_rdf::{serialize_turtle, Graph, PrefixMap};
use ontoquery_sparql::results::{boolean_to_json, table_to_json};
use ontoquery_sparql::ResultTable;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Error, Result};

pub const DEFAULT_EXPIRY: Duration = Duration::from_secs(3600);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JobState {
    Pending,
    Running,
    Succeeded,
    Failed,
}

impl JobState {
    pub fn is_finished(self) -> bool {
        matches!(self, JobState::Succeeded | JobState::Failed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobResult {
    Table(ResultTable),
    Boolean(bool),
    Graph(Graph),
    /// An update ran; nothing to return.
    Update,
    Ingest(IngestReport),
}

impl JobResult {
    /// Tables and booleans in the SPARQL JSON results format, graphs as
    /// Turtle text, ingestion as its report.
    pub fn to_json(&self) -> Value {
        match self {
            JobResult::Table(t) => json!({ "kind": "table", "table": table_to_json(t) }),
            JobResult::Boolean(b) => json!({ "kind": "boolean", "table": boolean_to_json(*b) }),
            JobResult::Graph(g) => json!({ "kind": "graph", "turtle": serialize_turtle(g, &PrefixMap::new()) }),
            JobResult::Update => json!({ "kind": "update" }),
            JobResult::Ingest(r) => json!({ "kind": "ingest", "report": r }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct JobStatus {
    pub job_id: String,
    pub state: JobState,
    pub percent_complete: u8,
    pub message: String,
}

#[derive(Debug)]
struct Entry {
    state: JobState,
    percent: u8,
    message: String,
    result: Option<Arc<JobResult>>,
    finished: Option<Instant>,
}

type Jobs = Mutex<HashMap<String, Arc<Mutex<Entry>>>>;

/// Handle given to a running job for reporting progress.
#[derive(Clone)]
pub struct Progress {
    entry: Arc<Mutex<Entry>>,
}

impl Progress {
    /// Raises the percentage; lower values are ignored and 100 is kept
    /// back until the job has succeeded.
    pub fn set(&self, percent: u8) {
        let mut e = self.entry.lock().unwrap_or_else(|p| p.into_inner());
        e.percent = e.percent.max(percent.min(99));
    }

    pub fn set_fraction(&self, done: usize, total: usize) {
        if let Some(p) = (done.min(total) * 100).checked_div(total) {
            self.set(p as u8);
        }
    }
}

#[derive(Debug)]
pub struct JobRegistry {
    jobs: Arc<Jobs>,
    expiry: Duration,
}

impl Default for JobRegistry {
    fn default() -> Self {
        JobRegistry::new(DEFAULT_EXPIRY)
    }
}

fn unknown(id: &str) -> Error {
    Error::NotFound(format!("no job {id:?}"))
}

impl JobRegistry {
    /// Finished jobs are forgotten `expiry` after completion.
    pub fn new(expiry: Duration) -> Self {
        JobRegistry {
            jobs: Arc::default(),
            expiry,
        }
    }

    /// Starts `work` on its own thread and returns the job id at once.
    pub fn submit<F>(&self, work: F) -> String
    where
        F: FnOnce(&Progress) -> Result<JobResult> + Send + 'static,
    {
        self.purge();
        let id = uuid::Uuid::new_v4().to_string();
        let entry = Arc::new(Mutex::new(Entry {
            state: JobState::Pending,
            percent: 0,
            message: String::new(),
            result: None,
            finished: None,
        }));
        self.jobs
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id.clone(), entry.clone());
        let progress = Progress { entry: entry.clone() };
        thread::spawn(move || {
            entry.lock().unwrap_or_else(|p| p.into_inner()).state = JobState::Running;
            let outcome = catch_unwind(AssertUnwindSafe(|| work(&progress)))
                .unwrap_or_else(|_| Err(Error::Internal("job panicked".into())));
            let mut e = entry.lock().unwrap_or_else(|p| p.into_inner());
            match outcome {
                Ok(result) => {
                    e.state = JobState::Succeeded;
                    e.percent = 100;
                    e.result = Some(Arc::new(result));
                }
                Err(err) => {
                    e.state = JobState::Failed;
                    e.message = match err.to_string() {
                        m if m.is_empty() => "job failed".into(),
                        m => m,
                    };
                }
            }
            e.finished = Some(Instant::now());
        });
        id
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>> {
        self.purge();
        self.jobs
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| unknown(id))
    }

    pub fn status(&self, id: &str) -> Result<JobStatus> {
        let entry = self.entry(id)?;
        let e = entry.lock().unwrap_or_else(|p| p.into_inner());
        Ok(JobStatus {
            job_id: id.to_string(),
            state: e.state,
            percent_complete: e.percent,
            message: e.message.clone(),
        })
    }

    /// The result of a succeeded job. `Conflict` while the job runs or
    /// when it failed, carrying the failure message.
    pub fn results(&self, id: &str) -> Result<Arc<JobResult>> {
        let entry = self.entry(id)?;
        let e = entry.lock().unwrap_or_else(|p| p.into_inner());
        match (e.state, &e.result) {
            (JobState::Succeeded, Some(r)) => Ok(r.clone()),
            (JobState::Failed, _) => Err(Error::Conflict(format!("job failed: {}", e.message))),
            _ => Err(Error::Conflict(format!("job {id} has not finished"))),
        }
    }

    /// Polls until the job finishes or `timeout` passes.
    pub fn wait(&self, id: &str, timeout: Duration) -> Result<JobStatus> {
        let deadline = Instant::now() + timeout;
        loop {
            let status = self.status(id)?;
            if status.state.is_finished() {
                return Ok(status);
            }
            if Instant::now() >= deadline {
                return Err(Error::Internal(format!("job {id} still running after {timeout:?}")));
            }
            thread::sleep(Duration::from_millis(5));
        }
    }

    pub fn len(&self) -> usize {
        self.jobs.lock().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn purge(&self) {
        let now = Instant::now();
        self.jobs.lock().unwrap_or_else(|p| p.into_inner()).retain(|_, entry| {
            let e = entry.lock().unwrap_or_else(|p| p.into_inner());
            e.finished.is_none_or(|t| now.duration_since(t) < self.expiry)
        });
    }
}

#[cfg(test)]
mod tests {
    use std::sync::mpsc;

    use super::*;

    #[test]
    fn success_and_failure() {
        let jobs = JobRegistry::default();
        let ok = jobs.submit(|_| Ok(JobResult::Boolean(true)));
        let bad = jobs.submit(|_| Err(Error::BadRequest("no such column".into())));
        assert_eq!(jobs.wait(&ok, Duration::from_secs(5)).unwrap().percent_complete, 100);
        assert_eq!(*jobs.results(&ok).unwrap(), JobResult::Boolean(true));
        let status = jobs.wait(&bad, Duration::from_secs(5)).unwrap();
        assert_eq!((status.state, status.message.as_str()), (JobState::Failed, "no such column"));
        assert_eq!(jobs.results(&bad), Err(Error::Conflict("job failed: no such column".into())));
        assert!(matches!(jobs.status("nope"), Err(Error::NotFound(_))));
        let panics = jobs.submit(|_| panic!("boom"));
        assert_eq!(jobs.wait(&panics, Duration::from_secs(5)).unwrap().state, JobState::Failed);
    }

    #[test]
    fn results_before_completion_conflict() {
        let jobs = JobRegistry::default();
        let (tx, rx) = mpsc::channel::<()>();
        let id = jobs.submit(move |p| {
            p.set(40);
            rx.recv().unwrap();
            Ok(JobResult::Update)
        });
        assert!(!jobs.status(&id).unwrap().state.is_finished());
        assert!(matches!(jobs.results(&id), Err(Error::Conflict(_))));
        tx.send(()).unwrap();
        jobs.wait(&id, Duration::from_secs(5)).unwrap();
        assert!(jobs.results(&id).is_ok());
    }

    #[test]
    fn percent_never_decreases_under_polling() {
        let jobs = Arc::new(JobRegistry::default());
        let id = jobs.submit(|p| {
            for i in [5u8, 3, 50, 10, 80, 120, 0] {
                p.set(i);
                thread::sleep(Duration::from_millis(1));
            }
            Ok(JobResult::Update)
        });
        let pollers: Vec<_> = (0..4)
            .map(|_| {
                let jobs = jobs.clone();
                let id = id.clone();
                thread::spawn(move || {
                    let mut seen = Vec::new();
                    loop {
                        let s = jobs.status(&id).unwrap();
                        seen.push(s.percent_complete);
                        if s.state.is_finished() {
                            return seen;
                        }
                    }
                })
            })
            .collect();
        for p in pollers {
            let seen = p.join().unwrap();
            assert!(seen.windows(2).all(|w| w[0] <= w[1]), "{seen:?}");
            assert_eq!(*seen.last().unwrap(), 100);
            assert!(seen[..seen.len() - 1].iter().all(|&v| v < 100));
        }
    }

    #[test]
    fn finished_jobs_expire() {
        let jobs = JobRegistry::new(Duration::from_millis(20));
        let id = jobs.submit(|_| Ok(JobResult::Update));
        jobs.wait(&id, Duration::from_secs(5)).unwrap();
        thread::sleep(Duration::from_millis(40));
        assert!(matches!(jobs.status(&id), Err(Error::NotFound(_))));
        assert!(jobs.is_empty());
    }
}
