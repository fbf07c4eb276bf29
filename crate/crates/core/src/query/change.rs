use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{beliefs_or_none, codes_of, inner_index, QueryError, Space};
use crate::belief::{BeliefLevel, CostVector};
use crate::network::{BeliefState, Network, Observations};

/// Bound on the number of partial assignments a change query may visit.
pub const DEFAULT_CHANGE_BOUND: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Increase,
    Decrease,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangePlan {
    /// Values for currently unobserved findings.
    pub assignments: Observations,
    pub resulting_belief: BeliefLevel,
    /// Signed rank difference from the current belief.
    pub rank_change: i8,
    /// Fewest actions whose yields cover the assignments; `None` when no set
    /// of actions does.
    pub supplying_actions: Option<Vec<String>>,
    /// Per-dimension maximum over the supplying actions.
    pub cost: Option<CostVector>,
}

pub fn query_change(
    net: &Network,
    state: &BeliefState,
    target: &str,
    direction: Direction,
    ceiling: Option<CostVector>,
) -> Result<Vec<ChangePlan>, QueryError> {
    query_change_bounded(net, state, target, direction, ceiling, DEFAULT_CHANGE_BOUND)
}

/// The inclusion-minimal sets of values for unobserved findings that move
/// the target strictly in `direction`, each paired with the actions that
/// would supply it.
///
/// A set is a plan for level `L` when it is consistent, reaches exactly `L`,
/// and no proper consistent subset reaches `L` or beyond.
pub fn query_change_bounded(
    net: &Network,
    state: &BeliefState,
    target: &str,
    direction: Direction,
    ceiling: Option<CostVector>,
    bound: usize,
) -> Result<Vec<ChangePlan>, QueryError> {
    let t = inner_index(net, target)?;
    let baseline = state.belief_at(net, t);
    let base = codes_of(net, state)?;
    let findings = Space::unobserved(net, &base, None);
    let space = Space::new(net, base, findings, true, bound)?;

    let mut stride = Vec::with_capacity(space.radix.len());
    let mut s = 1usize;
    for &r in &space.radix {
        stride.push(s);
        s *= r;
    }

    // Ranks shifted into 1..=7; 0 marks "no consistent subset".
    let up = direction == Direction::Increase;
    let mut level = vec![0u8; space.total];
    let mut best = vec![0u8; space.total];
    let mut buf = Vec::new();
    space.for_each(|idx, digits, codes| {
        if beliefs_or_none(net, codes, None, &mut buf) {
            level[idx] = (buf[t].rank() + 4) as u8;
        }
        let mut b = level[idx];
        for (i, &d) in digits.iter().enumerate() {
            if d > 0 {
                let sub = best[idx - d * stride[i]];
                if sub != 0 && (b == 0 || (up && sub > b) || (!up && sub < b)) {
                    b = sub;
                }
            }
        }
        best[idx] = b;
    });

    let base_rank = (baseline.rank() + 4) as u8;
    let priority = net.strategy().cost_priority;
    let mut plans = Vec::new();
    let mut digits = vec![0; space.radix.len()];
    for idx in 0..space.total {
        let l = level[idx];
        if l == 0 || (up && l <= base_rank) || (!up && l >= base_rank) {
            continue;
        }
        space.digits(idx, &mut digits);
        let minimal = digits.iter().enumerate().all(|(i, &d)| {
            if d == 0 {
                return true;
            }
            let sub = best[idx - d * stride[i]];
            sub == 0 || (up && sub < l) || (!up && sub > l)
        });
        if !minimal {
            continue;
        }
        let mut assignments = Observations::new();
        for (i, &d) in digits.iter().enumerate() {
            if d > 0 {
                let f = space.findings[i];
                let symbol = net.domain(f).expect("finding").symbol((d - 1) as u16);
                assignments.insert(net.node(f).id.clone(), symbol.to_string());
            }
        }
        let resulting = BeliefLevel::from_rank(l as i8 - 4).expect("rank in range");
        let cover = supplying_actions(net, &assignments);
        let plan = ChangePlan {
            rank_change: resulting.rank() - baseline.rank(),
            resulting_belief: resulting,
            cost: cover.as_ref().map(|(_, c)| *c),
            supplying_actions: cover.map(|(a, _)| a),
            assignments,
        };
        let fits = match (&ceiling, &plan.cost) {
            (None, _) => true,
            (Some(ceiling), Some(cost)) => cost.fits_within(ceiling),
            (Some(_), None) => false,
        };
        if fits {
            plans.push(plan);
        }
    }
    plans.sort_by(|a, b| {
        b.rank_change
            .abs()
            .cmp(&a.rank_change.abs())
            .then_with(|| match (&a.cost, &b.cost) {
                (Some(x), Some(y)) => x.cmp_by(y, &priority),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| a.assignments.cmp(&b.assignments))
    });
    Ok(plans)
}

/// Minimum-cardinality set of actions covering the assigned findings; ties
/// go to the cheaper joined cost, then to declaration order.
fn supplying_actions(net: &Network, assignments: &Observations) -> Option<(Vec<String>, CostVector)> {
    let actions = net.actions();
    let relevant: Vec<usize> = (0..actions.len())
        .filter(|&a| actions[a].yields.iter().any(|y| assignments.contains_key(y)))
        .collect();
    let needed: Vec<&String> = assignments.keys().collect();
    let covers = |set: &[usize]| {
        needed
            .iter()
            .all(|f| set.iter().any(|&a| actions[a].yields.contains(f)))
    };
    let priority = net.strategy().cost_priority;
    for k in 1..=relevant.len().min(needed.len()) {
        let mut best: Option<(Vec<usize>, CostVector)> = None;
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let set: Vec<usize> = combo.iter().map(|&i| relevant[i]).collect();
            if covers(&set) {
                let cost = set
                    .iter()
                    .fold(CostVector::FREE, |c, &a| c.join(&actions[a].cost));
                let better = match &best {
                    None => true,
                    Some((_, c)) => cost.cmp_by(c, &priority) == Ordering::Less,
                };
                if better {
                    best = Some((set, cost));
                }
            }
            if !next_combination(&mut combo, relevant.len()) {
                break;
            }
        }
        if let Some((set, cost)) = best {
            return Some((set.iter().map(|&a| actions[a].id.clone()).collect(), cost));
        }
    }
    None
}

/// Advances to the next k-subset of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
