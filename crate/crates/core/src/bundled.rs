//! The chest-pain knowledge base shipped with the engine.

use crate::kb::{load_kb, LoadedKb};

pub const CHEST_PAIN_SOURCE: &str = include_str!("../examples/chest-pain.mu");

pub fn chest_pain() -> LoadedKb {
    load_kb(CHEST_PAIN_SOURCE).expect("bundled knowledge base is valid")
}

/// Looks up a bundled KB by id.
pub fn bundled(id: &str) -> Option<&'static str> {
    match id {
        "chest-pain" => Some(CHEST_PAIN_SOURCE),
        _ => None,
    }
}
