use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use entwit::Tolerances64;

/// Everything needed to replay a run.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: Vec<String>,
    /// SHA-256 of the input file, if any.
    pub input_digest: Option<String>,
    pub seed: u64,
    pub tolerances: Tolerances64,
    pub outputs: serde_json::Value,
    pub wall_time_s: f64,
}

pub fn digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), crate::error::CliError> {
    let text = serde_json::to_string_pretty(value).expect("records serialize");
    std::fs::write(path, text + "\n").map_err(|source| crate::error::CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
