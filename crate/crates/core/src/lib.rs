//! Qualitative inference networks with discrete belief levels, declarative
//! control parameters, control-state queries and a workup planner.

pub mod belief;
pub mod bundled;
pub mod kb;
pub mod network;
pub mod params;
pub mod planner;
pub mod query;
#[cfg(feature = "testkit")]
pub mod testkit;

pub use belief::{BeliefLevel, CostDimension, CostGrade, CostVector, EvidenceRole, ThresholdMode};
pub use kb::{load_kb, parse_kb, serialize_kb, KbDocument, LoadedKb, SourceDiagnostic};
pub use network::{BeliefState, Network, NodeKind, Observations, PropagationResult};
