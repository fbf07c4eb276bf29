//! The typed evidence network: findings at the bottom, hypotheses at the
//! top, clusters in between, each non-finding node carrying its own local
//! combining function.

mod propagate;
mod state;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::belief::{BeliefLevel, EvidenceRole, ThresholdMode, UnknownName};
use crate::params::{ParamKind, ParameterDef, Value, ValueType};
use crate::planner::{ActionSpec, StrategyConfig};

pub use propagate::{BeliefChange, Inconsistent, PropagationError, PropagationResult};
pub use state::BeliefState;
pub use validate::{validate_network, Subject, ValidationReport, Violation, ViolationCode};

/// Finding id → normalized observed value (a symbol of the finding's domain).
pub type Observations = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Finding,
    Cluster,
    Hypothesis,
}

impl NodeKind {
    pub const ALL: [NodeKind; 3] = [NodeKind::Finding, NodeKind::Cluster, NodeKind::Hypothesis];

    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Finding => "finding",
            NodeKind::Cluster => "cluster",
            NodeKind::Hypothesis => "hypothesis",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for NodeKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.keyword() == s)
            .ok_or_else(|| UnknownName {
                what: "node kind",
                name: s.to_string(),
            })
    }
}

/// A labelled numeric interval. The last bin of a domain has no upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub label: String,
    /// Exclusive upper bound.
    pub upper: Option<f64>,
}

/// The admissible observed values of a finding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "values")]
pub enum FindingDomain {
    /// `true` / `false`
    Boolean,
    /// `present` / `absent`
    Presence,
    Values(Vec<String>),
    Numeric(Vec<Bin>),
}

impl FindingDomain {
    pub fn symbols(&self) -> Vec<&str> {
        match self {
            FindingDomain::Boolean => vec!["true", "false"],
            FindingDomain::Presence => vec!["present", "absent"],
            FindingDomain::Values(values) => values.iter().map(String::as_str).collect(),
            FindingDomain::Numeric(bins) => bins.iter().map(|b| b.label.as_str()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FindingDomain::Boolean | FindingDomain::Presence => 2,
            FindingDomain::Values(values) => values.len(),
            FindingDomain::Numeric(bins) => bins.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn code_of(&self, symbol: &str) -> Option<u16> {
        self.symbols()
            .iter()
            .position(|s| *s == symbol)
            .map(|p| p as u16)
    }

    pub fn symbol(&self, code: u16) -> &str {
        self.symbols()[code as usize]
    }

    /// Two-valued findings carry a decisive belief once observed; categorical
    /// and numeric findings only expose their value to rules.
    pub fn belief_for(&self, code: u16) -> BeliefLevel {
        match self {
            FindingDomain::Boolean | FindingDomain::Presence => {
                if code == 0 {
                    BeliefLevel::Confirmed
                } else {
                    BeliefLevel::Disconfirmed
                }
            }
            _ => BeliefLevel::Unknown,
        }
    }

    pub fn bin_for(&self, x: f64) -> Option<u16> {
        match self {
            FindingDomain::Numeric(bins) => bins
                .iter()
                .position(|b| b.upper.is_none_or(|u| x < u))
                .map(|p| p as u16),
            _ => None,
        }
    }

    /// Maps a raw answer onto a domain symbol.
    pub fn normalize(&self, raw: &RawValue) -> Option<String> {
        let code = match (self, raw) {
            (FindingDomain::Boolean, RawValue::Bool(b)) => Some(if *b { 0 } else { 1 }),
            (FindingDomain::Presence, RawValue::Bool(b)) => Some(if *b { 0 } else { 1 }),
            (FindingDomain::Numeric(_), RawValue::Number(x)) => self.bin_for(*x),
            (_, RawValue::Text(s)) => self.code_of(s).or_else(|| {
                let x: f64 = s.parse().ok()?;
                self.bin_for(x)
            }),
            _ => None,
        }?;
        Some(self.symbol(code).to_string())
    }
}

/// An answer as supplied by a patient profile or an operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl From<&str> for RawValue {
    fn from(s: &str) -> Self {
        RawValue::Text(s.to_string())
    }
}

impl fmt::Display for RawValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawValue::Bool(b) => write!(f, "{b}"),
            RawValue::Number(x) => write!(f, "{x}"),
            RawValue::Text(s) => f.write_str(s),
        }
    }
}

/// One condition of a combining rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "atom")]
pub enum RuleAtom {
    /// `source at-least LEVEL` / `source at-most LEVEL`
    Belief {
        source: String,
        mode: ThresholdMode,
        level: BeliefLevel,
    },
    /// `finding = value`
    Value { finding: String, value: String },
}

impl RuleAtom {
    pub fn source(&self) -> &str {
        match self {
            RuleAtom::Belief { source, .. } => source,
            RuleAtom::Value { finding, .. } => finding,
        }
    }
}

impl fmt::Display for RuleAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleAtom::Belief {
                source,
                mode,
                level,
            } => write!(f, "{source} {mode} {level}"),
            RuleAtom::Value { finding, value } => write!(f, "{finding} = {value}"),
        }
    }
}

/// One `if ... then LEVEL` entry of a local combining function. Priority is
/// the rule's position in its node's list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombiningRule {
    pub atoms: Vec<RuleAtom>,
    pub output: BeliefLevel,
}

impl fmt::Display for CombiningRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("if ")?;
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{atom}")?;
        }
        write!(f, " then {}", self.output)
    }
}

/// A node as declared in a knowledge base.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeSpec {
    pub id: String,
    /// Findings only.
    pub domain: Option<FindingDomain>,
    pub statics: BTreeMap<String, Value>,
    /// Clusters and hypotheses only.
    pub rules: Vec<CombiningRule>,
}

impl NodeSpec {
    pub fn finding(id: &str, domain: FindingDomain) -> Self {
        NodeSpec {
            id: id.to_string(),
            domain: Some(domain),
            ..Default::default()
        }
    }

    pub fn inner(id: &str, rules: Vec<CombiningRule>) -> Self {
        NodeSpec {
            id: id.to_string(),
            rules,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvidenceLink {
    pub source: String,
    pub target: String,
    pub role: EvidenceRole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub domain: Option<FindingDomain>,
    pub statics: BTreeMap<String, Value>,
    pub rules: Vec<CombiningRule>,
    compiled: Vec<CompiledRule>,
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledRule {
    atoms: Vec<CompiledAtom>,
    output: BeliefLevel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CompiledAtom {
    Belief {
        source: usize,
        mode: ThresholdMode,
        level: BeliefLevel,
    },
    Value {
        finding: usize,
        code: u16,
    },
}

/// A validated network together with its control parameters, actions and
/// strategy configuration. Immutable once built; belief state lives in
/// [`BeliefState`].
#[derive(Debug, Clone)]
pub struct Network {
    name: Option<String>,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    links: Vec<EvidenceLink>,
    preds: Vec<Vec<(usize, EvidenceRole)>>,
    succs: Vec<Vec<usize>>,
    topo: Vec<usize>,
    params: Vec<ParameterDef>,
    derived_order: [Vec<usize>; 3],
    actions: Vec<ActionSpec>,
    action_index: HashMap<String, usize>,
    strategy: StrategyConfig,
}

impl Network {
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node_by_id(&self, id: &str) -> Option<&Node> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    /// Node indices of the given kind, in declaration order.
    pub fn of_kind(&self, kind: NodeKind) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.nodes[i].kind == kind)
    }

    pub fn links(&self) -> &[EvidenceLink] {
        &self.links
    }

    pub fn predecessors(&self, idx: usize) -> &[(usize, EvidenceRole)] {
        &self.preds[idx]
    }

    pub fn successors(&self, idx: usize) -> &[usize] {
        &self.succs[idx]
    }

    pub fn role_between(&self, source: usize, target: usize) -> Option<EvidenceRole> {
        self.preds[target]
            .iter()
            .find(|(s, _)| *s == source)
            .map(|(_, r)| *r)
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// `mask[n]` is true when `n` is reachable from `from` (inclusive).
    pub fn descendants(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(n) = stack.pop() {
            for &s in &self.succs[n] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        seen
    }

    /// `mask[n]` is true when `to` is reachable from `n` (inclusive).
    pub fn ancestors(&self, to: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![to];
        seen[to] = true;
        while let Some(n) = stack.pop() {
            for &(p, _) in &self.preds[n] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.descendants(from)[to]
    }

    /// All parameter definitions, built-ins first.
    pub fn parameters(&self) -> &[ParameterDef] {
        &self.params
    }

    pub fn parameter(&self, kind: NodeKind, name: &str) -> Option<&ParameterDef> {
        self.params
            .iter()
            .find(|p| p.applies_to == kind && p.name == name)
    }

    pub fn parameter_type(&self, kind: NodeKind, name: &str) -> Option<ValueType> {
        self.parameter(kind, name).map(|p| p.value_type)
    }

    /// Derived parameters for a kind, in dependency order.
    pub fn derived_parameters(&self, kind: NodeKind) -> impl Iterator<Item = &ParameterDef> {
        self.derived_order[kind.slot()]
            .iter()
            .map(move |&i| &self.params[i])
    }

    /// Value of a static parameter, falling back to its declared default.
    pub fn static_value(&self, idx: usize, name: &str) -> Option<Value> {
        let node = &self.nodes[idx];
        if let Some(v) = node.statics.get(name) {
            return Some(v.clone());
        }
        self.parameter(node.kind, name)
            .filter(|p| p.kind == ParamKind::Static)
            .and_then(|p| p.default.clone())
    }

    pub fn actions(&self) -> &[ActionSpec] {
        &self.actions
    }

    pub fn action(&self, id: &str) -> Option<&ActionSpec> {
        self.action_index.get(id).map(|&i| &self.actions[i])
    }

    pub fn action_index(&self, id: &str) -> Option<usize> {
        self.action_index.get(id).copied()
    }

    pub fn strategy(&self) -> &StrategyConfig {
        &self.strategy
    }

    pub fn domain(&self, finding: usize) -> Option<&FindingDomain> {
        self.nodes[finding].domain.as_ref()
    }

    /// Normalizes a raw answer for a finding.
    pub fn normalize(&self, finding: &str, raw: &RawValue) -> Result<String, PropagationError> {
        let idx = self
            .index_of(finding)
            .filter(|&i| self.nodes[i].kind == NodeKind::Finding)
            .ok_or_else(|| PropagationError::UnknownFinding(finding.to_string()))?;
        self.nodes[idx]
            .domain
            .as_ref()
            .and_then(|d| d.normalize(raw))
            .ok_or_else(|| PropagationError::OutOfDomain {
                finding: finding.to_string(),
                value: raw.to_string(),
            })
    }
}
