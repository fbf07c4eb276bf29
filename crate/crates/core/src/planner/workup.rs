use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{candidate_actions, select_focus, Candidate, ControlStrategy, FocusChoice};
use crate::belief::BeliefLevel;
use crate::network::{BeliefChange, BeliefState, Network, NodeKind, Observations, PropagationError, PropagationResult};
use crate::query::QueryError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkupError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("observation outside the yields of `{action}`: {detail}")]
    ObservationOutsideYields { action: String, detail: String },
    #[error("no candidate actions to choose from")]
    EmptyCandidates,
    #[error("cycle limit must be at least 1")]
    InvalidCycleLimit,
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Answers findings on demand. An answer of `None` means the finding stays
/// unknown.
pub trait PatientModel {
    fn answer(&self, finding: &str) -> Option<String>;
}

impl PatientModel for BTreeMap<String, String> {
    fn answer(&self, finding: &str) -> Option<String> {
        self.get(finding).cloned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispositionKind {
    /// Some hypothesis was decided and none is left to focus on.
    Resolved,
    /// Nothing was decided and no action can still move the focus, if any.
    NoUsefulAction,
    CycleLimitExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disposition {
    pub kind: DispositionKind,
    pub confirmed: Vec<String>,
    pub disconfirmed: Vec<String>,
}

impl Disposition {
    pub fn new(net: &Network, state: &BeliefState, kind: DispositionKind) -> Self {
        let mut confirmed = Vec::new();
        let mut disconfirmed = Vec::new();
        for h in net.of_kind(NodeKind::Hypothesis) {
            match state.belief_at(net, h) {
                BeliefLevel::Confirmed => confirmed.push(net.node(h).id.clone()),
                BeliefLevel::Disconfirmed => disconfirmed.push(net.node(h).id.clone()),
                _ => {}
            }
        }
        Disposition {
            kind,
            confirmed,
            disconfirmed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 1-based.
    pub cycle: usize,
    pub focus: FocusChoice,
    pub candidates: Vec<Candidate>,
    pub chosen: String,
    /// Empty when the action produced no answer.
    pub observations: Observations,
    pub diff: Vec<BeliefChange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SessionTrace {
    /// Findings entered outside any action: the presenting complaint and
    /// anything an operator volunteers.
    pub volunteered: Observations,
    pub entries: Vec<TraceEntry>,
    pub disposition: Option<Disposition>,
}

impl SessionTrace {
    pub fn actions(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.chosen.as_str()).collect()
    }

    /// Every observation the trace records, in one set.
    pub fn observations(&self) -> Observations {
        let mut all = self.volunteered.clone();
        for e in &self.entries {
            all.extend(e.observations.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        all
    }

    pub fn is_flagged(&self) -> bool {
        matches!(
            self.disposition,
            Some(Disposition {
                kind: DispositionKind::CycleLimitExceeded,
                ..
            })
        )
    }
}

/// The next step of the control loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Recommendation {
    Action {
        focus: FocusChoice,
        candidates: Vec<Candidate>,
        chosen: Candidate,
        rationale: String,
    },
    Terminal { disposition: Disposition },
}

/// Picks a candidate with the strategy.
pub fn choose_action<'a>(candidates: &'a [Candidate], strategy: &dyn ControlStrategy) -> Result<&'a Candidate, WorkupError> {
    strategy
        .choose(candidates)
        .map(|i| &candidates[i])
        .ok_or(WorkupError::EmptyCandidates)
}

fn rationale(focus: &FocusChoice, chosen: &Candidate) -> String {
    let s = &chosen.score;
    format!(
        "focus {} ({}); {} costs {}; can raise {}, lower {}, confirm {}, disconfirm {}; max rank change {}",
        focus.node,
        focus.rationale,
        chosen.action,
        chosen.cost,
        s.can_raise,
        s.can_lower,
        s.can_confirm,
        s.can_disconfirm,
        s.max_rank_change
    )
}

/// One consultation in progress: belief state, performed actions and trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Workup {
    state: BeliefState,
    performed: BTreeSet<String>,
    trace: SessionTrace,
}

impl Workup {
    pub fn new(net: &Network) -> Result<Self, WorkupError> {
        Ok(Workup {
            state: BeliefState::new(net)?,
            performed: BTreeSet::new(),
            trace: SessionTrace::default(),
        })
    }

    pub fn state(&self) -> &BeliefState {
        &self.state
    }

    pub fn performed(&self) -> &BTreeSet<String> {
        &self.performed
    }

    pub fn trace(&self) -> &SessionTrace {
        &self.trace
    }

    pub fn into_trace(self) -> SessionTrace {
        self.trace
    }

    /// Focus, candidates and choice for the current state, or the terminal
    /// disposition when the loop would stop here.
    pub fn recommend(&self, net: &Network, strategy: &dyn ControlStrategy) -> Result<Recommendation, WorkupError> {
        let Some(focus) = select_focus(net, &self.state) else {
            let mut disposition = Disposition::new(net, &self.state, DispositionKind::Resolved);
            if disposition.confirmed.is_empty() && disposition.disconfirmed.is_empty() {
                disposition.kind = DispositionKind::NoUsefulAction;
            }
            return Ok(Recommendation::Terminal { disposition });
        };
        let candidates = candidate_actions(net, &self.state, &focus.node, &self.performed)?;
        let Some(i) = strategy.choose(&candidates) else {
            return Ok(Recommendation::Terminal {
                disposition: Disposition::new(net, &self.state, DispositionKind::NoUsefulAction),
            });
        };
        let chosen = candidates[i].clone();
        Ok(Recommendation::Action {
            rationale: rationale(&focus, &chosen),
            focus,
            candidates,
            chosen,
        })
    }

    /// Records findings that belong to no action.
    pub fn volunteer(&mut self, net: &Network, observed: &Observations) -> Result<PropagationResult, WorkupError> {
        let result = self.state.observe(net, observed)?;
        self.trace
            .volunteered
            .extend(observed.iter().map(|(k, v)| (k.clone(), v.clone())));
        Ok(result)
    }

    /// Incorporates the outcome of the recommended action and appends a
    /// trace entry. An empty `observed` set is an error; see
    /// [`Workup::record_unanswered`].
    pub fn record_outcome(
        &mut self,
        net: &Network,
        recommendation: &Recommendation,
        observed: &Observations,
    ) -> Result<PropagationResult, WorkupError> {
        let Recommendation::Action {
            focus,
            candidates,
            chosen,
            ..
        } = recommendation
        else {
            return Err(WorkupError::EmptyCandidates);
        };
        let action = net
            .action(&chosen.action)
            .ok_or_else(|| WorkupError::UnknownAction(chosen.action.clone()))?;
        check_yields(&action.id, &action.yields, observed)?;
        let result = self.state.observe(net, observed)?;
        self.performed.insert(action.id.clone());
        self.trace.entries.push(TraceEntry {
            cycle: self.trace.entries.len() + 1,
            focus: focus.clone(),
            candidates: candidates.clone(),
            chosen: action.id.clone(),
            observations: observed.clone(),
            diff: result.diff.clone(),
        });
        Ok(result)
    }

    /// Adds further results to the latest entry, for actions whose findings
    /// arrive one at a time.
    pub fn extend_outcome(&mut self, net: &Network, observed: &Observations) -> Result<PropagationResult, WorkupError> {
        let Some(last) = self.trace.entries.last() else {
            return Err(WorkupError::ObservationOutsideYields {
                action: String::new(),
                detail: "no action has been recorded".to_string(),
            });
        };
        let action = net
            .action(&last.chosen)
            .ok_or_else(|| WorkupError::UnknownAction(last.chosen.clone()))?;
        check_yields(&action.id, &action.yields, observed)?;
        let result = self.state.observe(net, observed)?;
        let last = self.trace.entries.last_mut().expect("checked above");
        last.observations
            .extend(observed.iter().map(|(k, v)| (k.clone(), v.clone())));
        last.diff.extend(result.diff.iter().cloned());
        Ok(result)
    }

    /// The action was taken but produced no answer.
    pub fn record_unanswered(&mut self, recommendation: &Recommendation) {
        if let Recommendation::Action {
            focus,
            candidates,
            chosen,
            ..
        } = recommendation
        {
            self.performed.insert(chosen.action.clone());
            self.trace.entries.push(TraceEntry {
                cycle: self.trace.entries.len() + 1,
                focus: focus.clone(),
                candidates: candidates.clone(),
                chosen: chosen.action.clone(),
                observations: Observations::new(),
                diff: Vec::new(),
            });
        }
    }

    pub fn finish(&mut self, disposition: Disposition) {
        self.trace.disposition = Some(disposition);
    }
}

fn check_yields(action: &str, yields: &[String], observed: &Observations) -> Result<(), WorkupError> {
    if observed.is_empty() {
        return Err(WorkupError::ObservationOutsideYields {
            action: action.to_string(),
            detail: "no finding was observed".to_string(),
        });
    }
    if let Some(extra) = observed.keys().find(|k| !yields.contains(k)) {
        return Err(WorkupError::ObservationOutsideYields {
            action: action.to_string(),
            detail: format!("`{extra}` is not yielded by this action"),
        });
    }
    Ok(())
}

/// Runs the control loop against a simulated patient: the presenting
/// findings of the strategy block first, then focus, candidates, choice and
/// outcome until the loop stops or `cycle_limit` actions have been taken.
pub fn run_workup(
    net: &Network,
    patient: &dyn PatientModel,
    strategy: &dyn ControlStrategy,
    cycle_limit: usize,
) -> Result<SessionTrace, WorkupError> {
    if cycle_limit == 0 {
        return Err(WorkupError::InvalidCycleLimit);
    }
    let mut workup = Workup::new(net)?;
    let presenting: Observations = net
        .strategy()
        .presenting
        .iter()
        .filter_map(|f| patient.answer(f).map(|v| (f.clone(), v)))
        .collect();
    if !presenting.is_empty() {
        workup.volunteer(net, &presenting)?;
    }
    loop {
        let recommendation = workup.recommend(net, strategy)?;
        let Recommendation::Action { chosen, .. } = &recommendation else {
            let Recommendation::Terminal { disposition } = recommendation else {
                unreachable!()
            };
            workup.finish(disposition);
            break;
        };
        if workup.trace.entries.len() >= cycle_limit {
            let d = Disposition::new(net, &workup.state, DispositionKind::CycleLimitExceeded);
            workup.finish(d);
            break;
        }
        let observed: Observations = chosen
            .asks
            .iter()
            .filter_map(|f| patient.answer(f).map(|v| (f.clone(), v)))
            .collect();
        if observed.is_empty() {
            workup.record_unanswered(&recommendation);
        } else {
            workup.record_outcome(net, &recommendation, &observed)?;
        }
    }
    Ok(workup.into_trace())
}
