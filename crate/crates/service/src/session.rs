//! A consultation session as a fold over its event log.

use std::collections::BTreeSet;
use std::sync::Arc;

use mu_core::network::{BeliefChange, Network, Observations, RawValue};
use mu_core::planner::{self, select_focus, Disposition, DispositionKind, MumStrategy, SessionTrace, Workup};

use crate::error::{codes, ServiceError};
use crate::event::{now, EventBody, SessionEvent};
use crate::kbs::KbRegistry;
use crate::protocol::{
    ActionView, QueryRequest, QueryResponse, Recommendation, RecommendationResponse, RecordFindingResponse,
    SessionStatus, StateResponse, TraceDocument,
};

/// Called with each new event before the session commits to it. An error
/// leaves the session unchanged.
pub type Persist<'a> = &'a mut dyn FnMut(&SessionEvent) -> Result<(), ServiceError>;

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    kb: String,
    net: Arc<Network>,
    strategy: MumStrategy,
    workup: Workup,
    pending: Option<Recommendation>,
    disposition: Option<Disposition>,
    /// Presenting findings the operator could not answer.
    declined: BTreeSet<String>,
    last_diff: Vec<BeliefChange>,
    events: Vec<SessionEvent>,
}

/// Everything observable about a session, for replay comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: StateResponse,
    pub trace: SessionTrace,
    pub declined: BTreeSet<String>,
    pub events: Vec<SessionEvent>,
}

pub fn new_session_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl Session {
    pub fn create(id: &str, kb: &str, kbs: &KbRegistry, persist: Persist) -> Result<Session, ServiceError> {
        let net = kbs.get(kb)?;
        let mut session = Session::empty(id, kb, net)?;
        session.commit(
            EventBody::Created {
                session: id.to_string(),
                kb: kb.to_string(),
            },
            persist,
        )?;
        Ok(session)
    }

    fn empty(id: &str, kb: &str, net: Arc<Network>) -> Result<Session, ServiceError> {
        Ok(Session {
            id: id.to_string(),
            kb: kb.to_string(),
            strategy: MumStrategy::from_config(net.strategy()),
            workup: Workup::new(&net)?,
            net,
            pending: None,
            disposition: None,
            declined: BTreeSet::new(),
            last_diff: Vec::new(),
            events: Vec::new(),
        })
    }

    /// Rebuilds a session from its events.
    pub fn replay(events: &[SessionEvent], kbs: &KbRegistry) -> Result<Session, ServiceError> {
        let Some(first) = events.first() else {
            return Err(ServiceError::new(codes::CORRUPT_LOG, "empty event log"));
        };
        let EventBody::Created { session, kb } = &first.body else {
            return Err(ServiceError::new(codes::CORRUPT_LOG, "log does not start with a created event"));
        };
        let mut s = Session::empty(session, kb, kbs.get(kb)?)?;
        for (i, e) in events.iter().enumerate() {
            if e.seq != i as u64 + 1 {
                return Err(ServiceError::new(
                    codes::CORRUPT_LOG,
                    format!("expected sequence number {}, found {}", i + 1, e.seq),
                ));
            }
            s.apply(&e.body).map_err(|err| {
                ServiceError::new(codes::CORRUPT_LOG, format!("event {} does not replay: {}", e.seq, err.message))
            })?;
            s.events.push(e.clone());
        }
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kb(&self) -> &str {
        &self.kb
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn workup(&self) -> &Workup {
        &self.workup
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn seq(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn status(&self) -> SessionStatus {
        if self.disposition.is_some() {
            SessionStatus::Terminated
        } else if self.pending.is_some() {
            SessionStatus::AwaitingInput
        } else {
            SessionStatus::Recommending
        }
    }

    fn commit(&mut self, body: EventBody, persist: Persist) -> Result<Vec<BeliefChange>, ServiceError> {
        let mut next = self.clone();
        let diff = next.apply(&body)?;
        let event = SessionEvent {
            seq: self.seq() + 1,
            timestamp: now(),
            body,
        };
        persist(&event)?;
        next.events.push(event);
        *self = next;
        Ok(diff)
    }

    fn apply(&mut self, body: &EventBody) -> Result<Vec<BeliefChange>, ServiceError> {
        match body {
            EventBody::Created { .. } => {
                if !self.events.is_empty() {
                    return Err(ServiceError::new(codes::CORRUPT_LOG, "second created event"));
                }
            }
            EventBody::Recommended { recommendation } => self.pending = Some(recommendation.clone()),
            EventBody::FindingRecorded { finding, value } => return self.apply_finding(finding, value.as_deref()),
            EventBody::QueryRun { .. } => {}
            EventBody::Terminated { disposition } => {
                self.pending = None;
                self.disposition = Some(disposition.clone());
                self.workup.finish(disposition.clone());
            }
        }
        Ok(Vec::new())
    }

    fn apply_finding(&mut self, finding: &str, value: Option<&str>) -> Result<Vec<BeliefChange>, ServiceError> {
        if self.disposition.is_some() {
            return Err(ServiceError::new(codes::SESSION_TERMINATED, "the session has terminated"));
        }
        let net = Arc::clone(&self.net);
        let pending = self.pending.take();
        let observed: Observations = value
            .map(|v| [(finding.to_string(), v.to_string())].into())
            .unwrap_or_default();
        let diff = match (&pending, value) {
            (Some(rec @ Recommendation::Action { action, .. }), _) if action.yields.iter().any(|y| y == finding) => {
                let core = to_core(rec);
                if value.is_some() {
                    self.workup.record_outcome(&net, &core, &observed)?.diff
                } else {
                    self.workup.record_unanswered(&core);
                    Vec::new()
                }
            }
            (Some(Recommendation::Presenting { findings, .. }), None) if findings.iter().any(|f| f == finding) => {
                self.declined.insert(finding.to_string());
                Vec::new()
            }
            (_, None) => {
                return Err(ServiceError::malformed(format!(
                    "a null value only answers a finding the pending recommendation asks for; `{finding}` is not one"
                )))
            }
            (_, Some(_)) => {
                let extends = self.workup.trace().entries.last().is_some_and(|e| {
                    !self.workup.state().observations().contains_key(finding)
                        && net.action(&e.chosen).is_some_and(|a| a.yields.iter().any(|y| y == finding))
                });
                if extends {
                    self.workup.extend_outcome(&net, &observed)?.diff
                } else {
                    self.workup.volunteer(&net, &observed)?.diff
                }
            }
        };
        self.last_diff = diff.clone();
        Ok(diff)
    }

    fn compute_recommendation(&self) -> Result<Recommendation, ServiceError> {
        let net = &*self.net;
        match self.workup.recommend(net, &self.strategy)? {
            planner::Recommendation::Action {
                focus,
                candidates,
                chosen,
                rationale,
            } => Ok(Recommendation::Action {
                action: ActionView::of(net, &chosen.action)
                    .ok_or_else(|| ServiceError::new(codes::INTERNAL_ERROR, "chosen action missing"))?,
                focus,
                chosen,
                candidates,
                rationale,
            }),
            planner::Recommendation::Terminal { disposition } => {
                let observed = self.workup.state().observations();
                let wanted: Vec<String> = net
                    .strategy()
                    .presenting
                    .iter()
                    .filter(|f| !observed.contains_key(*f) && !self.declined.contains(*f))
                    .cloned()
                    .collect();
                let nothing_decided = disposition.confirmed.is_empty() && disposition.disconfirmed.is_empty();
                if select_focus(net, self.workup.state()).is_none() && nothing_decided && !wanted.is_empty() {
                    Ok(Recommendation::Presenting {
                        rationale: format!("no hypothesis is in focus; ask for {}", wanted.join(", ")),
                        findings: wanted,
                    })
                } else {
                    Ok(Recommendation::Terminal { disposition })
                }
            }
        }
    }

    /// The pending recommendation, a fresh one, or the terminal disposition.
    /// A fresh recommendation is logged; reaching a terminal disposition ends
    /// the session.
    pub fn recommendation(&mut self, persist: Persist) -> Result<RecommendationResponse, ServiceError> {
        let recommendation = if let Some(d) = &self.disposition {
            Recommendation::Terminal { disposition: d.clone() }
        } else if let Some(p) = &self.pending {
            p.clone()
        } else {
            let r = self.compute_recommendation()?;
            let body = match &r {
                Recommendation::Terminal { disposition } => EventBody::Terminated {
                    disposition: disposition.clone(),
                },
                _ => EventBody::Recommended {
                    recommendation: r.clone(),
                },
            };
            self.commit(body, persist)?;
            r
        };
        Ok(RecommendationResponse {
            session: self.id.clone(),
            status: self.status(),
            recommendation,
        })
    }

    pub fn record_finding(
        &mut self,
        finding: &str,
        value: Option<&RawValue>,
        persist: Persist,
    ) -> Result<RecordFindingResponse, ServiceError> {
        let value = value.map(|v| self.net.normalize(finding, v)).transpose()?;
        let diff = self.commit(
            EventBody::FindingRecorded {
                finding: finding.to_string(),
                value,
            },
            persist,
        )?;
        Ok(RecordFindingResponse {
            session: self.id.clone(),
            status: self.status(),
            seq: self.seq(),
            beliefs: self.workup.state().result().beliefs.clone(),
            diff,
        })
    }

    /// Runs a read-only query and logs it.
    pub fn query(&mut self, request: &QueryRequest, persist: Persist) -> Result<QueryResponse, ServiceError> {
        let result = request.run(&self.net, self.workup.state())?;
        self.commit(
            EventBody::QueryRun {
                request: request.clone(),
            },
            persist,
        )?;
        Ok(QueryResponse {
            session: self.id.clone(),
            seq: self.seq(),
            result,
        })
    }

    /// Ends the session early, e.g. when the operator quits or a cycle limit
    /// is reached.
    pub fn terminate(&mut self, kind: DispositionKind, persist: Persist) -> Result<Disposition, ServiceError> {
        if let Some(d) = &self.disposition {
            return Ok(d.clone());
        }
        let d = Disposition::new(&self.net, self.workup.state(), kind);
        self.commit(EventBody::Terminated { disposition: d.clone() }, persist)?;
        Ok(d)
    }

    pub fn state(&self) -> StateResponse {
        let net = &*self.net;
        let s = self.workup.state();
        StateResponse {
            session: self.id.clone(),
            kb: self.kb.clone(),
            status: self.status(),
            seq: self.seq(),
            observations: s.observations().clone(),
            beliefs: s.result().beliefs.clone(),
            parameters: s.result().dynamic.clone(),
            diff: self.last_diff.clone(),
            focus: select_focus(net, s),
            performed: self.workup.performed().iter().cloned().collect(),
            pending: self.pending.clone(),
            disposition: self.disposition.clone(),
        }
    }

    pub fn trace(&self) -> TraceDocument {
        TraceDocument {
            session: self.id.clone(),
            kb: self.kb.clone(),
            trace: self.workup.trace().clone(),
            events: self.events.clone(),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            state: self.state(),
            trace: self.workup.trace().clone(),
            declined: self.declined.clone(),
            events: self.events.clone(),
        }
    }
}

fn to_core(rec: &Recommendation) -> planner::Recommendation {
    match rec {
        Recommendation::Action {
            focus,
            chosen,
            candidates,
            rationale,
            ..
        } => planner::Recommendation::Action {
            focus: focus.clone(),
            candidates: candidates.clone(),
            chosen: chosen.clone(),
            rationale: rationale.clone(),
        },
        _ => unreachable!("only action recommendations carry outcomes"),
    }
}

/// Persist callback that keeps nothing, for in-memory sessions.
pub fn no_persist() -> impl FnMut(&SessionEvent) -> Result<(), ServiceError> {
    |_| Ok(())
}
