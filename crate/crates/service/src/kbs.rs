use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use mu_core::bundled;
use mu_core::kb::{load_kb, SourceDiagnostic};
use mu_core::network::Network;

use crate::error::{codes, ServiceError};

/// Knowledge bases sessions may be created against, by id.
#[derive(Debug, Clone, Default)]
pub struct KbRegistry {
    kbs: BTreeMap<String, Arc<Network>>,
}

impl KbRegistry {
    /// The KBs shipped with the engine.
    pub fn bundled() -> Self {
        let mut r = KbRegistry::default();
        for id in ["chest-pain"] {
            let text = bundled::bundled(id).expect("bundled id");
            r.insert_text(Some(id), text).expect("bundled KB is valid");
        }
        r
    }

    /// Loads `text` and registers it under `id`, or under the KB's own name.
    pub fn insert_text(&mut self, id: Option<&str>, text: &str) -> Result<String, Vec<SourceDiagnostic>> {
        let loaded = load_kb(text)?;
        let id = id
            .map(str::to_string)
            .or_else(|| loaded.network.name().map(str::to_string))
            .unwrap_or_else(|| "kb".to_string());
        self.kbs.insert(id.clone(), Arc::new(loaded.network));
        Ok(id)
    }

    /// Registers a KB file. Its id is the `kb` name it declares, else the file stem.
    pub fn insert_file(&mut self, path: &Path) -> Result<String, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::new(codes::UNKNOWN_KB, format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("kb").to_string();
        let loaded = load_kb(&text).map_err(|diags| {
            let first = diags.iter().find(|d| d.severity == mu_core::kb::Severity::Error).unwrap_or(&diags[0]);
            ServiceError::from_diagnostic(codes::INVALID_KB, first)
        })?;
        let id = loaded.network.name().map(str::to_string).unwrap_or(stem);
        self.kbs.insert(id.clone(), Arc::new(loaded.network));
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Network>, ServiceError> {
        self.kbs
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::new(codes::UNKNOWN_KB, format!("no knowledge base `{id}`")))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.kbs.keys().map(String::as_str)
    }
}
