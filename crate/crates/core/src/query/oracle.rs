use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{beliefs_or_none, codes_of, node_index, QueryError, Space};
use crate::belief::BeliefLevel;
use crate::network::{BeliefState, Network, Observations};

pub const DEFAULT_ORACLE_BOUND: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "level")]
pub enum Outcome {
    Level(BeliefLevel),
    Inconsistent,
}

impl Outcome {
    pub fn level(self) -> Option<BeliefLevel> {
        match self {
            Outcome::Level(l) => Some(l),
            Outcome::Inconsistent => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRow {
    /// Values for the findings unobserved in the current state.
    pub assignment: Observations,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleTable {
    pub target: String,
    pub findings: Vec<String>,
    pub rows: Vec<OracleRow>,
}

impl OracleTable {
    pub fn max(&self) -> Option<BeliefLevel> {
        self.rows.iter().filter_map(|r| r.outcome.level()).max()
    }

    pub fn min(&self) -> Option<BeliefLevel> {
        self.rows.iter().filter_map(|r| r.outcome.level()).min()
    }

    pub fn as_map(&self) -> BTreeMap<Observations, Outcome> {
        self.rows
            .iter()
            .map(|r| (r.assignment.clone(), r.outcome))
            .collect()
    }
}

pub fn oracle_enumerate(net: &Network, state: &BeliefState, target: &str) -> Result<OracleTable, QueryError> {
    oracle_enumerate_bounded(net, state, target, DEFAULT_ORACLE_BOUND)
}

/// Target belief for every completion of the current observations.
pub fn oracle_enumerate_bounded(
    net: &Network,
    state: &BeliefState,
    target: &str,
    bound: usize,
) -> Result<OracleTable, QueryError> {
    let t = node_index(net, target)?;
    let base = codes_of(net, state)?;
    let findings = Space::unobserved(net, &base, None);
    let space = Space::new(net, base, findings, false, bound)?;
    let mut rows = Vec::with_capacity(space.total);
    let mut buf = Vec::new();
    space.for_each(|_, _, codes| {
        let outcome = if beliefs_or_none(net, codes, None, &mut buf) {
            Outcome::Level(buf[t])
        } else {
            Outcome::Inconsistent
        };
        let assignment = space
            .findings
            .iter()
            .map(|&f| {
                let domain = net.domain(f).expect("findings have domains");
                (net.node(f).id.clone(), domain.symbol(codes[f].unwrap()).to_string())
            })
            .collect();
        rows.push(OracleRow { assignment, outcome });
    });
    Ok(OracleTable {
        target: target.to_string(),
        findings: space.findings.iter().map(|&f| net.node(f).id.clone()).collect(),
        rows,
    })
}
