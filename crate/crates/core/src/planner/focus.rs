use std::fmt;

use serde::{Deserialize, Serialize};

use crate::belief::BeliefLevel;
use crate::network::{BeliefState, Network, NodeKind};
use crate::params::{Value, CRITICAL, DANGEROUS, TRIGGERED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FocusTier {
    Critical,
    TriggeredDangerous,
    Triggered,
}

impl FocusTier {
    pub fn name(self) -> &'static str {
        match self {
            FocusTier::Critical => "critical",
            FocusTier::TriggeredDangerous => "triggered-dangerous",
            FocusTier::Triggered => "triggered",
        }
    }
}

impl fmt::Display for FocusTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusChoice {
    pub node: String,
    pub tier: FocusTier,
    pub belief: BeliefLevel,
    pub rationale: String,
}

fn flag(state: &BeliefState, net: &Network, idx: usize, name: &str) -> Option<bool> {
    state.value(net, idx, name).and_then(|v| v.as_bool())
}

/// Tier of a hypothesis, or `None` when it is not a focus candidate.
fn tier_of(net: &Network, state: &BeliefState, idx: usize) -> Option<(FocusTier, String)> {
    let belief = state.belief_at(net, idx);
    let dangerous = flag(state, net, idx, DANGEROUS).unwrap_or(false);
    let triggered = flag(state, net, idx, TRIGGERED).unwrap_or(false);
    let critical = match state.value(net, idx, CRITICAL) {
        Some(Value::Bool(b)) => b,
        _ => belief >= BeliefLevel::Supported && dangerous,
    };
    let tier = if critical {
        FocusTier::Critical
    } else if triggered && dangerous {
        FocusTier::TriggeredDangerous
    } else if triggered {
        FocusTier::Triggered
    } else {
        return None;
    };
    let rationale = format!(
        "{tier}: belief {belief}, triggered {triggered}, dangerous {dangerous}, critical {critical}"
    );
    Some((tier, rationale))
}

/// The hypothesis to work on next. Decided hypotheses (confirmed or
/// disconfirmed) are never chosen.
pub fn select_focus(net: &Network, state: &BeliefState) -> Option<FocusChoice> {
    let mut best: Option<(FocusTier, BeliefLevel, usize, String)> = None;
    for idx in net.of_kind(NodeKind::Hypothesis) {
        let belief = state.belief_at(net, idx);
        if belief.is_decisive() {
            continue;
        }
        let Some((tier, rationale)) = tier_of(net, state, idx) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((t, b, _, _)) => tier < *t || (tier == *t && belief > *b),
        };
        if better {
            best = Some((tier, belief, idx, rationale));
        }
    }
    best.map(|(tier, belief, idx, rationale)| FocusChoice {
        node: net.node(idx).id.clone(),
        tier,
        belief,
        rationale,
    })
}
