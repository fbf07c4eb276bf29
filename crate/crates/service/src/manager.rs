//! Live sessions, their logs, and per-session serialization.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use mu_core::network::RawValue;

use crate::error::{codes, ServiceError};
use crate::event::SessionEvent;
use crate::kbs::KbRegistry;
use crate::protocol::{
    QueryRequest, QueryResponse, RecommendationResponse, RecordFindingResponse, StateResponse, TraceDocument,
};
use crate::session::{new_session_id, Session, Snapshot};
use crate::store::EventLog;

struct Entry {
    session: Session,
    log: Option<EventLog>,
}

impl Entry {
    fn with<T>(&mut self, op: impl FnOnce(&mut Session, &mut dyn FnMut(&SessionEvent) -> Result<(), ServiceError>) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let log = &mut self.log;
        let mut persist = |e: &SessionEvent| match log {
            Some(l) => l.append(e),
            None => Ok(()),
        };
        op(&mut self.session, &mut persist)
    }
}

/// All sessions of one service instance. Operations on one session run one
/// at a time; distinct sessions proceed independently.
pub struct SessionManager {
    kbs: KbRegistry,
    data_dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Entry>>>>,
}

impl SessionManager {
    /// Sessions live only in memory.
    pub fn in_memory(kbs: KbRegistry) -> Self {
        SessionManager {
            kbs,
            data_dir: None,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    /// Sessions are logged under `dir`; every log already there is replayed.
    pub fn open(kbs: KbRegistry, dir: &Path) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(dir)?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let events = EventLog::read(&path)?;
            if events.is_empty() {
                continue;
            }
            let session = Session::replay(&events, &kbs)?;
            if std::fs::read_to_string(&path)?.lines().filter(|l| !l.trim().is_empty()).count() != events.len() {
                EventLog::rewrite(&path, &events)?;
            }
            let log = EventLog::open(&path)?;
            sessions.insert(
                session.id().to_string(),
                Arc::new(Mutex::new(Entry {
                    session,
                    log: Some(log),
                })),
            );
        }
        Ok(SessionManager {
            kbs,
            data_dir: Some(dir.to_path_buf()),
            sessions: RwLock::new(sessions),
        })
    }

    pub fn kbs(&self) -> &KbRegistry {
        &self.kbs
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ServiceError> {
        self.sessions
            .read()
            .expect("lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::new(codes::UNKNOWN_SESSION, format!("no session `{id}`")))
    }

    fn with<T>(
        &self,
        id: &str,
        op: impl FnOnce(&mut Session, &mut dyn FnMut(&SessionEvent) -> Result<(), ServiceError>) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let entry = self.entry(id)?;
        let mut guard = entry.lock().unwrap_or_else(|p| p.into_inner());
        guard.with(op)
    }

    pub fn create(&self, kb: &str) -> Result<StateResponse, ServiceError> {
        self.kbs.get(kb)?;
        let id = new_session_id();
        let mut log = match &self.data_dir {
            Some(dir) => Some(EventLog::open(&EventLog::path_for(dir, &id))?),
            None => None,
        };
        let mut persist = |e: &SessionEvent| match &mut log {
            Some(l) => l.append(e),
            None => Ok(()),
        };
        let session = Session::create(&id, kb, &self.kbs, &mut persist)?;
        let state = session.state();
        self.sessions
            .write()
            .expect("lock")
            .insert(id, Arc::new(Mutex::new(Entry { session, log })));
        Ok(state)
    }

    pub fn state(&self, id: &str) -> Result<StateResponse, ServiceError> {
        self.with(id, |s, _| Ok(s.state()))
    }

    pub fn recommendation(&self, id: &str) -> Result<RecommendationResponse, ServiceError> {
        self.with(id, |s, p| s.recommendation(p))
    }

    pub fn record_finding(&self, id: &str, finding: &str, value: Option<&RawValue>) -> Result<RecordFindingResponse, ServiceError> {
        self.with(id, |s, p| s.record_finding(finding, value, p))
    }

    pub fn query(&self, id: &str, request: &QueryRequest) -> Result<QueryResponse, ServiceError> {
        self.with(id, |s, p| s.query(request, p))
    }

    pub fn trace(&self, id: &str) -> Result<TraceDocument, ServiceError> {
        self.with(id, |s, _| Ok(s.trace()))
    }

    pub fn snapshot(&self, id: &str) -> Result<Snapshot, ServiceError> {
        self.with(id, |s, _| Ok(s.snapshot()))
    }
}
