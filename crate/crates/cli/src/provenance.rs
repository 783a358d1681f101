use serde::Serialize;
use sha2::{Digest, Sha256};

/// Embedded in every JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub schema: &'static str,
    /// `git describe`-style build version.
    pub version: &'static str,
    pub command: &'static str,
    /// SHA-256 of the canonical JSON of the command's configuration.
    pub config_hash: String,
    pub seed: Option<u64>,
}

pub const SCHEMA: &str = "modbisect/1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the canonical JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let canonical = serde_json::to_vec(config).expect("configs serialize");
    sha256_hex(&canonical)
}

impl Provenance {
    pub fn new<T: Serialize>(command: &'static str, config: &T, seed: Option<u64>) -> Self {
        Self {
            tool: "modbisect",
            schema: SCHEMA,
            version: env!("MODBISECT_VERSION"),
            command,
            config_hash: config_hash(config),
            seed,
        }
    }
}
