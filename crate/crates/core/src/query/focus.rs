use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{node_index, QueryError};
use crate::belief::EvidenceRole;
use crate::network::{BeliefState, Network, NodeKind};
use crate::params::DerivedExpr;

/// A structural condition on a node's outgoing links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structural {
    /// Linked to the target as potentially supporting or confirming.
    Supports(String),
    /// Linked to the target as potentially detracting or disconfirming.
    Detracts(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodePredicate {
    /// `None` admits every kind.
    pub kind: Option<NodeKind>,
    pub condition: Option<DerivedExpr>,
    pub structural: Option<Structural>,
}

impl NodePredicate {
    pub fn of_kind(kind: NodeKind) -> Self {
        NodePredicate {
            kind: Some(kind),
            ..Default::default()
        }
    }

    pub fn with_condition(mut self, condition: DerivedExpr) -> Self {
        self.condition = Some(condition);
        self
    }

    pub fn with_structural(mut self, structural: Structural) -> Self {
        self.structural = Some(structural);
        self
    }
}

/// Nodes satisfying the predicate in the current state, as ids.
pub fn query_focus(net: &Network, state: &BeliefState, predicate: &NodePredicate) -> Result<BTreeSet<String>, QueryError> {
    let kinds: Vec<NodeKind> = match predicate.kind {
        Some(k) => vec![k],
        None => NodeKind::ALL.to_vec(),
    };
    if let Some(expr) = &predicate.condition {
        for &kind in &kinds {
            expr.check(&|name| net.parameter_type(kind, name))
                .map_err(|e| QueryError::UnknownParameterInPredicate(format!("{e} (on {kind})")))?;
        }
    }
    let structural = match &predicate.structural {
        Some(Structural::Supports(t)) => Some((node_index(net, t)?, 1)),
        Some(Structural::Detracts(t)) => Some((node_index(net, t)?, -1)),
        None => None,
    };
    let mut out = BTreeSet::new();
    for idx in 0..net.len() {
        if !kinds.contains(&net.node(idx).kind) {
            continue;
        }
        if let Some((target, polarity)) = structural {
            let ok = net
                .role_between(idx, target)
                .is_some_and(|r: EvidenceRole| r.polarity() == polarity);
            if !ok {
                continue;
            }
        }
        if let Some(expr) = &predicate.condition {
            let holds = expr
                .eval(&state.bindings(net, idx))
                .map_err(|e| QueryError::UnknownParameterInPredicate(e.to_string()))?;
            if !holds {
                continue;
            }
        }
        out.insert(net.node(idx).id.clone());
    }
    Ok(out)
}
