use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use kshatter::Budget;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct BudgetCaps {
    pub cap: String,
    pub unlimited: bool,
}

/// Provenance of one run, embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    /// Input path to lowercase hex SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub version: &'static str,
    pub budget: BudgetCaps,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, seed: u64, budget: &Budget) -> Self {
        RunManifest {
            command,
            inputs: BTreeMap::new(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            budget: BudgetCaps {
                cap: budget.cap.to_string(),
                unlimited: budget.unlimited,
            },
            wall_time_ms: None,
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs
            .insert(path.display().to_string(), format!("{:x}", Sha256::digest(bytes)));
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    manifest: &'a RunManifest,
    result: &'a serde_json::Value,
}

pub fn render_json(manifest: &RunManifest, result: &serde_json::Value) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        manifest,
        result,
    };
    let mut out = serde_json::to_string_pretty(&env).expect("serializable");
    out.push('\n');
    out
}

/// CSV rows preceded by `#` lines carrying the schema version and manifest.
pub fn render_csv(manifest: &RunManifest, header: &str, rows: &[String]) -> String {
    let mut out = format!(
        "# schema_version {SCHEMA_VERSION}\n# manifest {}\n{header}\n",
        serde_json::to_string(manifest).expect("serializable")
    );
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    out
}
