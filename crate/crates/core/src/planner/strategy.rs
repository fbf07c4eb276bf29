use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::candidates::Candidate;
use crate::belief::{CostDimension, DEFAULT_COST_PRIORITY};

/// The `strategy` block of a knowledge base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub name: String,
    /// Dimension order for lexicographic cost comparison.
    pub cost_priority: [CostDimension; 3],
    /// Findings volunteered at the start of a consultation (the presenting
    /// complaint), recorded before the control loop runs.
    pub presenting: Vec<String>,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            name: "default".to_string(),
            cost_priority: DEFAULT_COST_PRIORITY,
            presenting: Vec::new(),
        }
    }
}

/// Picks the next action among scored candidates. Candidates arrive in KB
/// declaration order.
pub trait ControlStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Index into `candidates`, or `None` if the slice is empty.
    fn choose(&self, candidates: &[Candidate]) -> Option<usize>;
}

/// Cheapest action that can move the focus, compared lexicographically by
/// cost dimension; ties go to the larger possible change in the focus, then
/// to declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MumStrategy {
    pub cost_priority: [CostDimension; 3],
}

impl Default for MumStrategy {
    fn default() -> Self {
        MumStrategy {
            cost_priority: DEFAULT_COST_PRIORITY,
        }
    }
}

impl MumStrategy {
    pub fn from_config(config: &StrategyConfig) -> Self {
        MumStrategy {
            cost_priority: config.cost_priority,
        }
    }

    fn compare(&self, a: &Candidate, b: &Candidate) -> Ordering {
        a.cost
            .cmp_by(&b.cost, &self.cost_priority)
            .then_with(|| b.score.max_rank_change.cmp(&a.score.max_rank_change))
            .then_with(|| a.order.cmp(&b.order))
    }
}

impl ControlStrategy for MumStrategy {
    fn name(&self) -> &str {
        "mum-default"
    }

    fn choose(&self, candidates: &[Candidate]) -> Option<usize> {
        let movers: Vec<usize> = (0..candidates.len())
            .filter(|&i| candidates[i].score.can_move())
            .collect();
        movers
            .into_iter()
            .min_by(|&a, &b| self.compare(&candidates[a], &candidates[b]))
    }
}
