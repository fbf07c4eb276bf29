//! Request and response bodies of the `/v1` protocol.

use std::collections::{BTreeMap, BTreeSet};

use mu_core::belief::{BeliefLevel, CostGrade, CostVector};
use mu_core::kb::parse_expr;
use mu_core::network::{BeliefChange, BeliefState, Network, NodeKind, Observations, RawValue};
use mu_core::params::Value;
use mu_core::planner::{ActionKind, Candidate, Disposition, FocusChoice, SessionTrace};
use mu_core::query::{
    query_change, query_discriminate_with, query_effect, query_focus, query_state, ChangePlan, Direction,
    DiscriminationMode, EffectMode, NodePredicate, Structural, DEFAULT_ORACLE_BOUND,
};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::event::SessionEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionStatus {
    /// A recommendation is out and the session waits for its answers.
    AwaitingInput,
    Recommending,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub kb: String,
}

/// One finding value: a domain symbol, a boolean, or a number for binned
/// findings. A `null` value records that the pending recommendation got no
/// answer for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordFindingRequest {
    pub finding: String,
    pub value: Option<RawValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionView {
    pub id: String,
    pub kind: ActionKind,
    pub cost: CostVector,
    pub yields: Vec<String>,
    pub preconditions: Vec<String>,
}

impl ActionView {
    pub fn of(net: &Network, id: &str) -> Option<Self> {
        let a = net.action(id)?;
        Some(ActionView {
            id: a.id.clone(),
            kind: a.kind,
            cost: a.cost,
            yields: a.yields.clone(),
            preconditions: a.preconditions.iter().map(|p| p.to_string()).collect(),
        })
    }
}

/// What the session suggests doing next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Recommendation {
    Action {
        focus: FocusChoice,
        action: ActionView,
        chosen: Candidate,
        candidates: Vec<Candidate>,
        rationale: String,
    },
    /// Nothing is in focus yet; these presenting findings are wanted first.
    Presenting { findings: Vec<String>, rationale: String },
    Terminal { disposition: Disposition },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationResponse {
    pub session: String,
    pub status: SessionStatus,
    pub recommendation: Recommendation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateResponse {
    pub session: String,
    pub kb: String,
    pub status: SessionStatus,
    /// Sequence number of the latest event.
    pub seq: u64,
    pub observations: Observations,
    pub beliefs: BTreeMap<String, BeliefLevel>,
    /// Node id → dynamic and derived parameter values.
    pub parameters: BTreeMap<String, BTreeMap<String, Value>>,
    /// Belief changes caused by the latest recorded finding.
    pub diff: Vec<BeliefChange>,
    pub focus: Option<FocusChoice>,
    pub performed: Vec<String>,
    pub pending: Option<Recommendation>,
    pub disposition: Option<Disposition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordFindingResponse {
    pub session: String,
    pub status: SessionStatus,
    pub seq: u64,
    pub beliefs: BTreeMap<String, BeliefLevel>,
    pub diff: Vec<BeliefChange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub session: String,
    pub kb: String,
    pub trace: SessionTrace,
    pub events: Vec<SessionEvent>,
}

/// A cost ceiling. Missing dimensions are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ceiling {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monetary: Option<CostGrade>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<CostGrade>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discomfort: Option<CostGrade>,
}

impl Ceiling {
    pub fn to_cost(self) -> CostVector {
        let max = CostGrade::VeryHigh;
        CostVector::new(
            self.monetary.unwrap_or(max),
            self.risk.unwrap_or(max),
            self.discomfort.unwrap_or(max),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class")]
pub enum QueryRequest {
    State {
        node: String,
        parameter: String,
    },
    Change {
        target: String,
        direction: Direction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ceiling: Option<Ceiling>,
    },
    Effect {
        finding: String,
        #[serde(default)]
        mode: EffectMode,
    },
    Discriminate {
        h1: String,
        h2: String,
        #[serde(default)]
        mode: DiscriminationMode,
    },
    Focus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kind: Option<NodeKind>,
        /// Parameter expression in KB syntax, e.g. `belief at-least supported`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        condition: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        structural: Option<Structural>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class")]
pub enum QueryResult {
    State {
        node: String,
        parameter: String,
        value: Value,
    },
    Change {
        target: String,
        direction: Direction,
        current: BeliefLevel,
        plans: Vec<ChangePlan>,
    },
    Effect {
        finding: String,
        mode: EffectMode,
        nodes: BTreeSet<String>,
    },
    Discriminate {
        h1: String,
        h2: String,
        mode: DiscriminationMode,
        discriminators: BTreeSet<String>,
    },
    Focus { nodes: BTreeSet<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub session: String,
    pub seq: u64,
    pub result: QueryResult,
}

impl QueryRequest {
    /// Runs the query against a belief state. Never mutates it.
    pub fn run(&self, net: &Network, state: &BeliefState) -> Result<QueryResult, ServiceError> {
        Ok(match self {
            QueryRequest::State { node, parameter } => QueryResult::State {
                node: node.clone(),
                parameter: parameter.clone(),
                value: query_state(net, state, node, parameter)?,
            },
            QueryRequest::Change {
                target,
                direction,
                ceiling,
            } => {
                let plans = query_change(net, state, target, *direction, ceiling.map(Ceiling::to_cost))?;
                QueryResult::Change {
                    target: target.clone(),
                    direction: *direction,
                    current: state.belief(target),
                    plans,
                }
            }
            QueryRequest::Effect { finding, mode } => QueryResult::Effect {
                finding: finding.clone(),
                mode: *mode,
                nodes: query_effect(net, state, finding, *mode)?,
            },
            QueryRequest::Discriminate { h1, h2, mode } => QueryResult::Discriminate {
                h1: h1.clone(),
                h2: h2.clone(),
                mode: *mode,
                discriminators: query_discriminate_with(net, state, h1, h2, *mode, DEFAULT_ORACLE_BOUND)?,
            },
            QueryRequest::Focus {
                kind,
                condition,
                structural,
            } => {
                let condition = match condition {
                    Some(text) => Some(parse_expr(text).map_err(|diags| {
                        let d = &diags[0];
                        ServiceError::malformed(format!("condition: {}", d.message)).at(d.location)
                    })?),
                    None => None,
                };
                let predicate = NodePredicate {
                    kind: *kind,
                    condition,
                    structural: structural.clone(),
                };
                QueryResult::Focus {
                    nodes: query_focus(net, state, &predicate)?,
                }
            }
        })
    }
}
