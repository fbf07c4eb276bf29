//! The five classes of control-state questions, and the exhaustive oracle
//! that serves as their reference semantics.

mod change;
mod discriminate;
mod effect;
mod focus;
mod oracle;
mod state;

pub use change::{query_change, query_change_bounded, ChangePlan, Direction, DEFAULT_CHANGE_BOUND};
pub use discriminate::{path_signs, query_discriminate, query_discriminate_with, DiscriminationMode};
pub use effect::{query_effect, query_effect_bounded, EffectMode};
pub use focus::{query_focus, NodePredicate, Structural};
pub use oracle::{oracle_enumerate, oracle_enumerate_bounded, OracleRow, OracleTable, Outcome, DEFAULT_ORACLE_BOUND};
pub use state::query_state;

use crate::belief::BeliefLevel;
use crate::network::{BeliefState, Network, NodeKind, PropagationError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("unknown node or action `{0}`")]
    UnknownNode(String),
    #[error("`{node}` has no parameter `{name}`")]
    UnknownParameter { node: String, name: String },
    #[error("predicate refers to an unknown parameter: {0}")]
    UnknownParameterInPredicate(String),
    #[error("`{node}` is a {found}; this query needs a {expected}")]
    WrongKind {
        node: String,
        expected: &'static str,
        found: NodeKind,
    },
    #[error("{size} combinations exceed the bound of {bound}")]
    StateSpaceTooLarge { size: u128, bound: usize },
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

pub(crate) fn node_index(net: &Network, id: &str) -> Result<usize, QueryError> {
    net.index_of(id)
        .ok_or_else(|| QueryError::UnknownNode(id.to_string()))
}

pub(crate) fn inner_index(net: &Network, id: &str) -> Result<usize, QueryError> {
    let idx = node_index(net, id)?;
    match net.node(idx).kind {
        NodeKind::Finding => Err(QueryError::WrongKind {
            node: id.to_string(),
            expected: "cluster or hypothesis",
            found: NodeKind::Finding,
        }),
        _ => Ok(idx),
    }
}

/// Mixed-radix enumeration of value codes for a set of findings, starting
/// from a fixed base assignment. With `partial`, digit 0 means "left as in
/// the base" and digit `k` means value code `k - 1`.
pub(crate) struct Space {
    pub findings: Vec<usize>,
    pub radix: Vec<usize>,
    pub base: Vec<Option<u16>>,
    pub total: usize,
    partial: bool,
}

impl Space {
    pub fn new(
        net: &Network,
        base: Vec<Option<u16>>,
        findings: Vec<usize>,
        partial: bool,
        bound: usize,
    ) -> Result<Self, QueryError> {
        let radix: Vec<usize> = findings
            .iter()
            .map(|&f| net.domain(f).map_or(1, |d| d.len()) + usize::from(partial))
            .collect();
        let size = radix.iter().fold(1u128, |acc, &r| acc.saturating_mul(r as u128));
        if size > bound as u128 {
            return Err(QueryError::StateSpaceTooLarge { size, bound });
        }
        Ok(Space {
            findings,
            radix,
            base,
            total: size as usize,
            partial,
        })
    }

    /// Unobserved findings of the state, in declaration order, minus `except`.
    pub fn unobserved(net: &Network, codes: &[Option<u16>], except: Option<usize>) -> Vec<usize> {
        net.of_kind(NodeKind::Finding)
            .filter(|&f| codes[f].is_none() && Some(f) != except)
            .collect()
    }

    pub fn digits(&self, mut index: usize, out: &mut [usize]) {
        for (d, &r) in out.iter_mut().zip(&self.radix) {
            *d = index % r;
            index /= r;
        }
    }

    /// Writes the assignment for `digits` into `codes` (which must start as a
    /// copy of the base).
    pub fn apply(&self, digits: &[usize], codes: &mut [Option<u16>]) {
        for (i, &f) in self.findings.iter().enumerate() {
            codes[f] = if self.partial {
                match digits[i] {
                    0 => self.base[f],
                    k => Some((k - 1) as u16),
                }
            } else {
                Some(digits[i] as u16)
            };
        }
    }

    /// Calls `visit(index, codes)` for every point of the space.
    pub fn for_each(&self, mut visit: impl FnMut(usize, &[usize], &[Option<u16>])) {
        let mut digits = vec![0; self.findings.len()];
        let mut codes = self.base.clone();
        for index in 0..self.total {
            self.digits(index, &mut digits);
            self.apply(&digits, &mut codes);
            visit(index, &digits, &codes);
        }
    }
}

/// Beliefs for a code vector, `None` when the evidence is inconsistent.
pub(crate) fn beliefs_or_none(
    net: &Network,
    codes: &[Option<u16>],
    forced: Option<(usize, BeliefLevel)>,
    buf: &mut Vec<BeliefLevel>,
) -> bool {
    buf.clear();
    buf.resize(net.len(), BeliefLevel::Unknown);
    net.evaluate_into(codes, forced, buf).is_ok()
}

pub(crate) fn codes_of(net: &Network, state: &BeliefState) -> Result<Vec<Option<u16>>, QueryError> {
    Ok(net.encode(state.observations())?)
}
