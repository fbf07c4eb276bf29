use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{beliefs_or_none, codes_of, node_index, QueryError, Space, DEFAULT_ORACLE_BOUND};
use crate::network::{BeliefState, Network, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectMode {
    #[default]
    Syntactic,
    Semantic,
}

pub fn query_effect(
    net: &Network,
    state: &BeliefState,
    finding: &str,
    mode: EffectMode,
) -> Result<BTreeSet<String>, QueryError> {
    query_effect_bounded(net, state, finding, mode, DEFAULT_ORACLE_BOUND)
}

/// Nodes whose belief a finding can influence.
///
/// Syntactic mode answers with everything downstream of the finding.
/// Semantic mode sets the finding aside and, for every completion of the
/// other unobserved findings, compares the beliefs produced by each pair of
/// its values; pairs where either side is inconsistent are skipped.
pub fn query_effect_bounded(
    net: &Network,
    state: &BeliefState,
    finding: &str,
    mode: EffectMode,
    bound: usize,
) -> Result<BTreeSet<String>, QueryError> {
    let f = node_index(net, finding)?;
    if net.node(f).kind != NodeKind::Finding {
        return Err(QueryError::WrongKind {
            node: finding.to_string(),
            expected: "finding",
            found: net.node(f).kind,
        });
    }
    let reach = net.descendants(f);
    if mode == EffectMode::Syntactic {
        return Ok((0..net.len())
            .filter(|&n| n != f && reach[n])
            .map(|n| net.node(n).id.clone())
            .collect());
    }

    let mut base = codes_of(net, state)?;
    base[f] = None;
    let others = Space::unobserved(net, &base, Some(f));
    let space = Space::new(net, base, others, false, bound)?;
    let values = net.domain(f).expect("finding").len();
    let mut affected = vec![false; net.len()];
    let mut outcomes: Vec<Option<Vec<_>>> = vec![None; values];
    let mut buf = Vec::new();
    space.for_each(|_, _, codes| {
        let mut codes = codes.to_vec();
        for (v, slot) in outcomes.iter_mut().enumerate() {
            codes[f] = Some(v as u16);
            *slot = beliefs_or_none(net, &codes, None, &mut buf).then(|| buf.clone());
        }
        let consistent: Vec<&Vec<_>> = outcomes.iter().flatten().collect();
        for pair in consistent.windows(2) {
            for n in 0..net.len() {
                if pair[0][n] != pair[1][n] {
                    affected[n] = true;
                }
            }
        }
    });
    Ok((0..net.len())
        .filter(|&n| n != f && affected[n])
        .map(|n| net.node(n).id.clone())
        .collect())
}
