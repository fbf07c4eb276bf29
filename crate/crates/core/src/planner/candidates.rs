use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ActionKind;
use crate::belief::{BeliefLevel, CostVector};
use crate::network::{BeliefState, Network};
use crate::query::{query_change, ChangePlan, Direction, QueryError};

/// What an action's outcomes can do to the focus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Score {
    /// Largest rank change any outcome can bring about.
    pub max_rank_change: u8,
    pub can_raise: bool,
    pub can_lower: bool,
    pub can_confirm: bool,
    pub can_disconfirm: bool,
}

impl Score {
    pub fn can_move(&self) -> bool {
        self.can_raise || self.can_lower
    }

    fn add(&mut self, rank_change: i8, level: BeliefLevel) {
        self.max_rank_change = self.max_rank_change.max(rank_change.unsigned_abs());
        self.can_raise |= rank_change > 0;
        self.can_lower |= rank_change < 0;
        self.can_confirm |= rank_change > 0 && level == BeliefLevel::Confirmed;
        self.can_disconfirm |= rank_change < 0 && level == BeliefLevel::Disconfirmed;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub action: String,
    /// Position in the KB's action list.
    pub order: usize,
    pub kind: ActionKind,
    pub cost: CostVector,
    pub score: Score,
    /// Yielded findings still unobserved.
    pub asks: Vec<String>,
}

/// Legal actions with positive marginal utility for the focus, in
/// declaration order.
///
/// An action qualifies when it has not been performed (or is repeatable),
/// its preconditions hold, one of its unobserved yields reaches the focus,
/// and one of those yields takes part in a minimal plan that raises or
/// lowers the focus.
pub fn candidate_actions(
    net: &Network,
    state: &BeliefState,
    focus: &str,
    performed: &BTreeSet<String>,
) -> Result<Vec<Candidate>, QueryError> {
    let f = crate::query::inner_index(net, focus)?;
    let plans = match (
        query_change(net, state, focus, Direction::Increase, None),
        query_change(net, state, focus, Direction::Decrease, None),
    ) {
        (Ok(mut up), Ok(down)) => {
            up.extend(down);
            Some(up)
        }
        (Err(QueryError::StateSpaceTooLarge { .. }), _) | (_, Err(QueryError::StateSpaceTooLarge { .. })) => None,
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };

    let mut out = Vec::new();
    for (order, action) in net.actions().iter().enumerate() {
        if performed.contains(&action.id) && !action.repeatable {
            continue;
        }
        if !action.preconditions_hold(net, state) {
            continue;
        }
        let asks: Vec<String> = action
            .yields
            .iter()
            .filter(|y| !state.observations().contains_key(*y))
            .cloned()
            .collect();
        let reaches = asks
            .iter()
            .any(|y| net.index_of(y).is_some_and(|i| net.reaches(i, f)));
        if !reaches {
            continue;
        }
        let score = match &plans {
            Some(plans) => score_from_plans(plans, &asks),
            None => score_by_outcomes(net, state, f, &asks)?,
        };
        if !score.can_move() {
            continue;
        }
        out.push(Candidate {
            action: action.id.clone(),
            order,
            kind: action.kind,
            cost: action.cost,
            score,
            asks,
        });
    }
    Ok(out)
}

fn score_from_plans(plans: &[ChangePlan], asks: &[String]) -> Score {
    let mut score = Score::default();
    for plan in plans {
        if asks.iter().any(|y| plan.assignments.contains_key(y)) {
            score.add(plan.rank_change, plan.resulting_belief);
        }
    }
    score
}

/// Fallback when the change query is too large: the joint outcomes of the
/// action's own yields, everything else as observed now.
fn score_by_outcomes(net: &Network, state: &BeliefState, focus: usize, asks: &[String]) -> Result<Score, QueryError> {
    let current = state.belief_at(net, focus);
    let mut codes = net.encode(state.observations())?;
    let idx: Vec<usize> = asks.iter().filter_map(|y| net.index_of(y)).collect();
    let radix: Vec<usize> = idx.iter().map(|&i| net.domain(i).map_or(1, |d| d.len())).collect();
    let total: usize = radix.iter().product();
    let mut score = Score::default();
    for mut n in 0..total {
        for (k, &i) in idx.iter().enumerate() {
            codes[i] = Some((n % radix[k]) as u16);
            n /= radix[k];
        }
        if let Ok(beliefs) = net.evaluate_beliefs(&codes, None) {
            let level = beliefs[focus];
            score.add(level.rank() - current.rank(), level);
        }
    }
    Ok(score)
}
