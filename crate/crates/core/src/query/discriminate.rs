use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{beliefs_or_none, codes_of, node_index, QueryError, Space, DEFAULT_ORACLE_BOUND};
use crate::belief::BeliefLevel;
use crate::network::{BeliefState, Network, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscriminationMode {
    /// Semantic when the completions fit the bound, heuristic otherwise.
    #[default]
    Auto,
    Semantic,
    Heuristic,
}

pub fn query_discriminate(
    net: &Network,
    state: &BeliefState,
    h1: &str,
    h2: &str,
) -> Result<BTreeSet<String>, QueryError> {
    query_discriminate_with(net, state, h1, h2, DiscriminationMode::Auto, DEFAULT_ORACLE_BOUND)
}

/// Findings and clusters upstream of both hypotheses that can move their
/// beliefs in opposite directions.
pub fn query_discriminate_with(
    net: &Network,
    state: &BeliefState,
    h1: &str,
    h2: &str,
    mode: DiscriminationMode,
    bound: usize,
) -> Result<BTreeSet<String>, QueryError> {
    let a = hypothesis(net, h1)?;
    let b = hypothesis(net, h2)?;
    if a == b {
        return Ok(BTreeSet::new());
    }
    let up_a = net.ancestors(a);
    let up_b = net.ancestors(b);
    let candidates: Vec<usize> = (0..net.len())
        .filter(|&d| d != a && d != b && up_a[d] && up_b[d])
        .filter(|&d| net.node(d).kind != NodeKind::Hypothesis)
        .collect();
    let mut out = BTreeSet::new();
    for d in candidates {
        let hit = match mode {
            DiscriminationMode::Heuristic => heuristic(net, d, a, b),
            DiscriminationMode::Semantic => semantic(net, state, d, a, b, bound)?,
            DiscriminationMode::Auto => match semantic(net, state, d, a, b, bound) {
                Ok(hit) => hit,
                Err(QueryError::StateSpaceTooLarge { .. }) => heuristic(net, d, a, b),
                Err(e) => return Err(e),
            },
        };
        if hit {
            out.insert(net.node(d).id.clone());
        }
    }
    Ok(out)
}

fn hypothesis(net: &Network, id: &str) -> Result<usize, QueryError> {
    let idx = node_index(net, id)?;
    match net.node(idx).kind {
        NodeKind::Hypothesis => Ok(idx),
        found => Err(QueryError::WrongKind {
            node: id.to_string(),
            expected: "hypothesis",
            found,
        }),
    }
}

/// Signs of the role paths from `from` to `to`, where a path's sign is the
/// product of its roles' polarities: `(has positive path, has negative path)`.
pub fn path_signs(net: &Network, from: usize, to: usize) -> (bool, bool) {
    let mut signs = vec![(false, false); net.len()];
    signs[from] = (true, false);
    for &n in net.topological_order() {
        for &(p, role) in net.predecessors(n) {
            let (pos, neg) = signs[p];
            let (pos, neg) = if role.polarity() > 0 { (pos, neg) } else { (neg, pos) };
            signs[n].0 |= pos;
            signs[n].1 |= neg;
        }
    }
    signs[to]
}

fn heuristic(net: &Network, d: usize, a: usize, b: usize) -> bool {
    let (a_pos, a_neg) = path_signs(net, d, a);
    let (b_pos, b_neg) = path_signs(net, d, b);
    (a_pos && b_neg) || (a_neg && b_pos)
}

fn opposite(x: &[BeliefLevel], y: &[BeliefLevel], a: usize, b: usize) -> bool {
    let da = y[a].rank() - x[a].rank();
    let db = y[b].rank() - x[b].rank();
    (da > 0 && db < 0) || (da < 0 && db > 0)
}

fn semantic(
    net: &Network,
    state: &BeliefState,
    d: usize,
    a: usize,
    b: usize,
    bound: usize,
) -> Result<bool, QueryError> {
    let mut base = codes_of(net, state)?;
    let is_finding = net.node(d).kind == NodeKind::Finding;
    if is_finding {
        base[d] = None;
    }
    let others = Space::unobserved(net, &base, is_finding.then_some(d));
    let space = Space::new(net, base, others, false, bound)?;

    // The outcomes of D: its values, or for a cluster the levels its rules
    // can produce.
    let outcomes: Vec<Option<(usize, BeliefLevel)>> = if is_finding {
        vec![None; net.domain(d).expect("finding").len()]
    } else {
        let mut levels: BTreeSet<BeliefLevel> = net.node(d).rules.iter().map(|r| r.output).collect();
        levels.insert(BeliefLevel::Unknown);
        levels.into_iter().map(|l| Some((d, l))).collect()
    };

    let mut found = false;
    let mut buf = Vec::new();
    let mut rows: Vec<Option<Vec<BeliefLevel>>> = vec![None; outcomes.len()];
    space.for_each(|_, _, codes| {
        if found {
            return;
        }
        let mut codes = codes.to_vec();
        for (i, forced) in outcomes.iter().enumerate() {
            if is_finding {
                codes[d] = Some(i as u16);
            }
            rows[i] = beliefs_or_none(net, &codes, *forced, &mut buf).then(|| buf.clone());
        }
        let consistent: Vec<&Vec<BeliefLevel>> = rows.iter().flatten().collect();
        for (i, x) in consistent.iter().enumerate() {
            for y in &consistent[i + 1..] {
                if opposite(x, y, a, b) {
                    found = true;
                    return;
                }
            }
        }
    });
    Ok(found)
}
