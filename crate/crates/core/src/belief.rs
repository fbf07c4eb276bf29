//! The belief lattice, evidence roles and the ordinal cost scale.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the seven symbolic levels of belief, totally ordered by rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeliefLevel {
    Disconfirmed,
    StronglyDetracted,
    Detracted,
    Unknown,
    Supported,
    StronglySupported,
    Confirmed,
}

impl BeliefLevel {
    /// All levels in ascending rank order.
    pub const ALL: [BeliefLevel; 7] = [
        BeliefLevel::Disconfirmed,
        BeliefLevel::StronglyDetracted,
        BeliefLevel::Detracted,
        BeliefLevel::Unknown,
        BeliefLevel::Supported,
        BeliefLevel::StronglySupported,
        BeliefLevel::Confirmed,
    ];

    pub fn rank(self) -> i8 {
        match self {
            BeliefLevel::Disconfirmed => -3,
            BeliefLevel::StronglyDetracted => -2,
            BeliefLevel::Detracted => -1,
            BeliefLevel::Unknown => 0,
            BeliefLevel::Supported => 1,
            BeliefLevel::StronglySupported => 2,
            BeliefLevel::Confirmed => 3,
        }
    }

    pub fn from_rank(rank: i8) -> Option<BeliefLevel> {
        if (-3..=3).contains(&rank) {
            Some(Self::ALL[(rank + 3) as usize])
        } else {
            None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BeliefLevel::Disconfirmed => "disconfirmed",
            BeliefLevel::StronglyDetracted => "strongly-detracted",
            BeliefLevel::Detracted => "detracted",
            BeliefLevel::Unknown => "unknown",
            BeliefLevel::Supported => "supported",
            BeliefLevel::StronglySupported => "strongly-supported",
            BeliefLevel::Confirmed => "confirmed",
        }
    }

    /// True for the two decisive levels, `confirmed` and `disconfirmed`.
    pub fn is_decisive(self) -> bool {
        matches!(self, BeliefLevel::Confirmed | BeliefLevel::Disconfirmed)
    }

    pub fn satisfies(self, mode: ThresholdMode, bound: BeliefLevel) -> bool {
        satisfies_threshold(self, mode, bound)
    }
}

pub fn compare_levels(a: BeliefLevel, b: BeliefLevel) -> Ordering {
    a.rank().cmp(&b.rank())
}

pub fn satisfies_threshold(level: BeliefLevel, mode: ThresholdMode, bound: BeliefLevel) -> bool {
    match mode {
        ThresholdMode::AtLeast => level.rank() >= bound.rank(),
        ThresholdMode::AtMost => level.rank() <= bound.rank(),
    }
}

impl Ord for BeliefLevel {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_levels(*self, *other)
    }
}

impl PartialOrd for BeliefLevel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BeliefLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BeliefLevel {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|level| level.name() == s)
            .ok_or_else(|| UnknownName::new("belief level", s))
    }
}

/// Returned by the `FromStr` impls in this module.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {what} `{name}`")]
pub struct UnknownName {
    pub what: &'static str,
    pub name: String,
}

impl UnknownName {
    fn new(what: &'static str, name: &str) -> Self {
        UnknownName {
            what,
            name: name.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    AtLeast,
    AtMost,
}

impl ThresholdMode {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdMode::AtLeast => "at-least",
            ThresholdMode::AtMost => "at-most",
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdMode {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "at-least" => Ok(ThresholdMode::AtLeast),
            "at-most" => Ok(ThresholdMode::AtMost),
            _ => Err(UnknownName::new("threshold mode", s)),
        }
    }
}

/// What an evidence link's source can do to its target's belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvidenceRole {
    PotentiallySupporting,
    PotentiallyDetracting,
    PotentiallyConfirming,
    PotentiallyDisconfirming,
}

impl EvidenceRole {
    pub const ALL: [EvidenceRole; 4] = [
        EvidenceRole::PotentiallySupporting,
        EvidenceRole::PotentiallyDetracting,
        EvidenceRole::PotentiallyConfirming,
        EvidenceRole::PotentiallyDisconfirming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EvidenceRole::PotentiallySupporting => "potentially-supporting",
            EvidenceRole::PotentiallyDetracting => "potentially-detracting",
            EvidenceRole::PotentiallyConfirming => "potentially-confirming",
            EvidenceRole::PotentiallyDisconfirming => "potentially-disconfirming",
        }
    }

    /// +1 for roles that push the target up, -1 for roles that push it down.
    pub fn polarity(self) -> i8 {
        match self {
            EvidenceRole::PotentiallySupporting | EvidenceRole::PotentiallyConfirming => 1,
            EvidenceRole::PotentiallyDetracting | EvidenceRole::PotentiallyDisconfirming => -1,
        }
    }
}

impl fmt::Display for EvidenceRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvidenceRole {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|role| role.name() == s)
            .ok_or_else(|| UnknownName::new("evidence role", s))
    }
}

/// Grade on the ordinal cost scale. Only comparisons are meaningful.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "kebab-case")]
pub enum CostGrade {
    #[default]
    Free,
    Low,
    Moderate,
    High,
    VeryHigh,
}

impl CostGrade {
    pub const ALL: [CostGrade; 5] = [
        CostGrade::Free,
        CostGrade::Low,
        CostGrade::Moderate,
        CostGrade::High,
        CostGrade::VeryHigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostGrade::Free => "free",
            CostGrade::Low => "low",
            CostGrade::Moderate => "moderate",
            CostGrade::High => "high",
            CostGrade::VeryHigh => "very-high",
        }
    }
}

impl fmt::Display for CostGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostGrade {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|grade| grade.name() == s)
            .ok_or_else(|| UnknownName::new("cost grade", s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostDimension {
    Monetary,
    Risk,
    Discomfort,
}

impl CostDimension {
    pub const ALL: [CostDimension; 3] = [
        CostDimension::Monetary,
        CostDimension::Risk,
        CostDimension::Discomfort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostDimension::Monetary => "monetary",
            CostDimension::Risk => "risk",
            CostDimension::Discomfort => "discomfort",
        }
    }
}

impl fmt::Display for CostDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostDimension {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|dim| dim.name() == s)
            .ok_or_else(|| UnknownName::new("cost dimension", s))
    }
}

/// Three-dimensional ordinal cost. Never collapsed into a single number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CostVector {
    pub monetary: CostGrade,
    pub risk: CostGrade,
    pub discomfort: CostGrade,
}

impl CostVector {
    pub const FREE: CostVector = CostVector {
        monetary: CostGrade::Free,
        risk: CostGrade::Free,
        discomfort: CostGrade::Free,
    };

    /// A ceiling that admits every cost.
    pub const UNBOUNDED: CostVector = CostVector {
        monetary: CostGrade::VeryHigh,
        risk: CostGrade::VeryHigh,
        discomfort: CostGrade::VeryHigh,
    };

    pub fn new(monetary: CostGrade, risk: CostGrade, discomfort: CostGrade) -> Self {
        CostVector {
            monetary,
            risk,
            discomfort,
        }
    }

    pub fn get(&self, dim: CostDimension) -> CostGrade {
        match dim {
            CostDimension::Monetary => self.monetary,
            CostDimension::Risk => self.risk,
            CostDimension::Discomfort => self.discomfort,
        }
    }

    pub fn set(&mut self, dim: CostDimension, grade: CostGrade) {
        match dim {
            CostDimension::Monetary => self.monetary = grade,
            CostDimension::Risk => self.risk = grade,
            CostDimension::Discomfort => self.discomfort = grade,
        }
    }

    /// Per-dimension comparison: every dimension is at most the ceiling's.
    pub fn fits_within(&self, ceiling: &CostVector) -> bool {
        CostDimension::ALL
            .iter()
            .all(|&dim| self.get(dim) <= ceiling.get(dim))
    }

    /// Per-dimension maximum.
    pub fn join(&self, other: &CostVector) -> CostVector {
        CostVector {
            monetary: self.monetary.max(other.monetary),
            risk: self.risk.max(other.risk),
            discomfort: self.discomfort.max(other.discomfort),
        }
    }

    pub fn is_free(&self) -> bool {
        *self == CostVector::FREE
    }

    /// Lexicographic comparison under the given dimension priority.
    pub fn cmp_by(&self, other: &CostVector, priority: &[CostDimension; 3]) -> Ordering {
        priority
            .iter()
            .map(|&dim| self.get(dim).cmp(&other.get(dim)))
            .find(|ord| ord.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{ monetary: {}, risk: {}, discomfort: {} }}",
            self.monetary, self.risk, self.discomfort
        )
    }
}

/// Default priority for lexicographic cost comparison: risk, then money, then discomfort.
pub const DEFAULT_COST_PRIORITY: [CostDimension; 3] = [
    CostDimension::Risk,
    CostDimension::Monetary,
    CostDimension::Discomfort,
];
