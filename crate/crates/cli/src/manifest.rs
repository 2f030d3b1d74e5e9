use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use trapnoise::CODATA_2018;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// Provenance record written into every output. It carries no timestamp,
/// so identical invocations produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_paths: Vec<String>,
    pub overrides: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub constants_fingerprint: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config_paths: Vec::new(),
            overrides: BTreeMap::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            constants_fingerprint: CODATA_2018.fingerprint(),
        }
    }

    pub fn config(mut self, path: &Path) -> Self {
        self.config_paths.push(path.display().to_string());
        self
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.overrides.insert(key.to_string(), value.to_string());
        self
    }

    /// Single-line CSV header comment.
    pub fn csv_comment(&self) -> String {
        format!("# manifest: {}\n", serde_json::to_string(self).expect("manifest serialises"))
    }
}
