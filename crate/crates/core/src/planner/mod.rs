//! Focus selection, action scoring and the workup control loop.

mod action;
mod candidates;
mod focus;
mod strategy;
mod workup;

pub use action::{ActionKind, ActionSpec, Precondition};
pub use candidates::{candidate_actions, Candidate, Score};
pub use focus::{select_focus, FocusChoice, FocusTier};
pub use strategy::{ControlStrategy, MumStrategy, StrategyConfig};
pub use workup::{
    choose_action, run_workup, Disposition, DispositionKind, PatientModel, Recommendation, SessionTrace,
    TraceEntry, Workup, WorkupError,
};
