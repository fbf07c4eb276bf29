use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::belief::{CostVector, UnknownName};
use crate::network::{BeliefState, Network};
use crate::params::DerivedExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    Question,
    Test,
    Treatment,
}

impl ActionKind {
    pub const ALL: [ActionKind; 3] = [ActionKind::Question, ActionKind::Test, ActionKind::Treatment];

    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::Question => "question",
            ActionKind::Test => "test",
            ActionKind::Treatment => "treatment",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for ActionKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.keyword() == s)
            .ok_or_else(|| UnknownName {
                what: "action kind",
                name: s.to_string(),
            })
    }
}

/// A condition on one node's parameters that must hold before an action is legal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precondition {
    pub node: String,
    pub condition: DerivedExpr,
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.node, self.condition)
    }
}

/// A question, test or treatment. Every action yields findings; some also
/// require belief states before they may be taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpec {
    pub id: String,
    pub kind: ActionKind,
    pub cost: CostVector,
    pub yields: Vec<String>,
    pub preconditions: Vec<Precondition>,
    pub repeatable: bool,
}

impl ActionSpec {
    /// True when every precondition holds in `state`. Validation guarantees
    /// the names resolve; an evaluation failure counts as not holding.
    pub fn preconditions_hold(&self, net: &Network, state: &BeliefState) -> bool {
        self.preconditions.iter().all(|pre| {
            net.index_of(&pre.node).is_some_and(|idx| {
                pre.condition
                    .eval(&state.bindings(net, idx))
                    .unwrap_or(false)
            })
        })
    }
}
