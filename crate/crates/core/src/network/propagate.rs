use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CompiledAtom, Network, NodeKind, Observations};
use crate::belief::{BeliefLevel, EvidenceRole};
use crate::params::{Bindings, EvalError, Value, BELIEF, OBSERVED, TRIGGERED};

/// A node's rules concluded both `confirmed` and `disconfirmed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inconsistent {
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PropagationError {
    #[error("inconsistent evidence at `{node}`: rules conclude both confirmed and disconfirmed")]
    InconsistentEvidence { node: String },
    #[error("`{0}` is not a finding of this network")]
    UnknownFinding(String),
    #[error("`{value}` is not an admissible value of `{finding}`")]
    OutOfDomain { finding: String, value: String },
    #[error("parameter evaluation failed: {0}")]
    Evaluation(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeliefChange {
    pub node: String,
    pub old: BeliefLevel,
    pub new: BeliefLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PropagationResult {
    pub beliefs: BTreeMap<String, BeliefLevel>,
    /// Node id → dynamic and derived parameter values.
    pub dynamic: BTreeMap<String, BTreeMap<String, Value>>,
    /// Exactly the nodes whose belief differs from the prior state.
    pub diff: Vec<BeliefChange>,
}

impl PropagationResult {
    pub fn belief(&self, node: &str) -> BeliefLevel {
        self.beliefs
            .get(node)
            .copied()
            .unwrap_or(BeliefLevel::Unknown)
    }

    pub fn param(&self, node: &str, name: &str) -> Option<&Value> {
        self.dynamic.get(node).and_then(|m| m.get(name))
    }
}

/// Parameter scope of one node after propagation.
pub(crate) struct NodeScope<'a> {
    pub net: &'a Network,
    pub idx: usize,
    pub belief: BeliefLevel,
    pub dynamic: &'a BTreeMap<String, Value>,
}

impl Bindings for NodeScope<'_> {
    fn lookup(&self, name: &str) -> Option<Value> {
        if name == BELIEF {
            return Some(Value::Level(self.belief));
        }
        if let Some(v) = self.dynamic.get(name) {
            return Some(v.clone());
        }
        self.net.static_value(self.idx, name)
    }
}

impl Network {
    /// Encodes observations as per-node value codes (`None` = unobserved).
    pub fn encode(&self, observations: &Observations) -> Result<Vec<Option<u16>>, PropagationError> {
        let mut codes = vec![None; self.nodes.len()];
        for (finding, value) in observations {
            let idx = self
                .index_of(finding)
                .filter(|&i| self.nodes[i].kind == NodeKind::Finding)
                .ok_or_else(|| PropagationError::UnknownFinding(finding.clone()))?;
            let code = self.nodes[idx]
                .domain
                .as_ref()
                .and_then(|d| d.code_of(value))
                .ok_or_else(|| PropagationError::OutOfDomain {
                    finding: finding.clone(),
                    value: value.clone(),
                })?;
            codes[idx] = Some(code);
        }
        Ok(codes)
    }

    /// Applies a node's local combining function.
    ///
    /// Every matching rule is collected. A confirmed conclusion together with a
    /// disconfirmed one is an inconsistency; otherwise a decisive conclusion
    /// wins, then the first matching rule in priority order. No match gives
    /// `unknown`.
    pub fn evaluate_combining(
        &self,
        node: usize,
        beliefs: &[BeliefLevel],
        codes: &[Option<u16>],
    ) -> Result<BeliefLevel, Inconsistent> {
        let mut first = None;
        let mut confirmed = false;
        let mut disconfirmed = false;
        for rule in &self.nodes[node].compiled {
            let holds = rule.atoms.iter().all(|atom| match *atom {
                CompiledAtom::Belief {
                    source,
                    mode,
                    level,
                } => beliefs[source].satisfies(mode, level),
                CompiledAtom::Value { finding, code } => codes[finding] == Some(code),
            });
            if !holds {
                continue;
            }
            match rule.output {
                BeliefLevel::Confirmed => confirmed = true,
                BeliefLevel::Disconfirmed => disconfirmed = true,
                out => {
                    first.get_or_insert(out);
                }
            }
        }
        match (confirmed, disconfirmed) {
            (true, true) => Err(Inconsistent { node }),
            (true, false) => Ok(BeliefLevel::Confirmed),
            (false, true) => Ok(BeliefLevel::Disconfirmed),
            (false, false) => Ok(first.unwrap_or(BeliefLevel::Unknown)),
        }
    }

    /// Beliefs only, in one topological sweep. `forced` pins one node's belief
    /// in place of its combining function.
    pub fn evaluate_beliefs(
        &self,
        codes: &[Option<u16>],
        forced: Option<(usize, BeliefLevel)>,
    ) -> Result<Vec<BeliefLevel>, Inconsistent> {
        let mut beliefs = vec![BeliefLevel::Unknown; self.nodes.len()];
        self.evaluate_into(codes, forced, &mut beliefs)?;
        Ok(beliefs)
    }

    pub(crate) fn evaluate_into(
        &self,
        codes: &[Option<u16>],
        forced: Option<(usize, BeliefLevel)>,
        beliefs: &mut [BeliefLevel],
    ) -> Result<(), Inconsistent> {
        for &n in &self.topo {
            beliefs[n] = match forced {
                Some((f, level)) if f == n => level,
                _ => match &self.nodes[n].domain {
                    Some(domain) => codes[n]
                        .map(|c| domain.belief_for(c))
                        .unwrap_or(BeliefLevel::Unknown),
                    None => self.evaluate_combining(n, beliefs, codes)?,
                },
            };
        }
        Ok(())
    }

    /// `triggered`: the node is at least supported, or some supporting or
    /// confirming predecessor is.
    pub(crate) fn is_triggered(&self, idx: usize, beliefs: &[BeliefLevel]) -> bool {
        beliefs[idx] >= BeliefLevel::Supported
            || self.preds[idx].iter().any(|&(p, role)| {
                matches!(
                    role,
                    EvidenceRole::PotentiallySupporting | EvidenceRole::PotentiallyConfirming
                ) && beliefs[p] >= BeliefLevel::Supported
            })
    }

    fn dynamic_parameters(
        &self,
        beliefs: &[BeliefLevel],
        codes: &[Option<u16>],
    ) -> Result<Vec<BTreeMap<String, Value>>, EvalError> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for (idx, node) in self.nodes.iter().enumerate() {
            let mut params = BTreeMap::new();
            match node.kind {
                NodeKind::Finding => {
                    params.insert(OBSERVED.to_string(), Value::Bool(codes[idx].is_some()));
                }
                _ => {
                    params.insert(
                        TRIGGERED.to_string(),
                        Value::Bool(self.is_triggered(idx, beliefs)),
                    );
                }
            }
            for def in self.derived_parameters(node.kind) {
                let Some(expr) = &def.expression else { continue };
                let value = {
                    let scope = NodeScope {
                        net: self,
                        idx,
                        belief: beliefs[idx],
                        dynamic: &params,
                    };
                    expr.eval(&scope)?
                };
                params.insert(def.name.clone(), Value::Bool(value));
            }
            out.push(params);
        }
        Ok(out)
    }

    fn inconsistency(&self, e: Inconsistent) -> PropagationError {
        PropagationError::InconsistentEvidence {
            node: self.nodes[e.node].id.clone(),
        }
    }

    /// Full propagation from scratch; the diff is taken against the
    /// evidence-free state in which every belief is `unknown`.
    pub fn propagate(&self, observations: &Observations) -> Result<PropagationResult, PropagationError> {
        self.propagate_from(&BTreeMap::new(), observations)
    }

    /// Full propagation with the diff taken against `prior` beliefs
    /// (missing entries count as `unknown`).
    pub fn propagate_from(
        &self,
        prior: &BTreeMap<String, BeliefLevel>,
        observations: &Observations,
    ) -> Result<PropagationResult, PropagationError> {
        let codes = self.encode(observations)?;
        let beliefs = self
            .evaluate_beliefs(&codes, None)
            .map_err(|e| self.inconsistency(e))?;
        let dynamic = self.dynamic_parameters(&beliefs, &codes)?;
        let mut result = PropagationResult::default();
        for (idx, node) in self.nodes.iter().enumerate() {
            let old = prior.get(&node.id).copied().unwrap_or(BeliefLevel::Unknown);
            if old != beliefs[idx] {
                result.diff.push(BeliefChange {
                    node: node.id.clone(),
                    old,
                    new: beliefs[idx],
                });
            }
            result.beliefs.insert(node.id.clone(), beliefs[idx]);
        }
        result.dynamic = self
            .nodes
            .iter()
            .zip(dynamic)
            .map(|(n, d)| (n.id.clone(), d))
            .collect();
        Ok(result)
    }
}
