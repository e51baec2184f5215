use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Sidecar written next to every output file.
///
/// `args` is a complete argument list: running `spheremix <args>` with
/// `--out` reproduces a file whose checksum equals `output_sha256`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub params: serde_json::Value,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub version: &'static str,
    pub duration_seconds: f64,
    pub output_sha256: String,
    pub output_bytes: usize,
}

impl RunManifest {
    pub fn new(
        command: &'static str,
        params: serde_json::Value,
        args: Vec<String>,
        seed: Option<u64>,
        threads: Option<usize>,
        duration_seconds: f64,
        output: &[u8],
    ) -> Self {
        RunManifest {
            command,
            params,
            args,
            seed,
            threads,
            version: env!("CARGO_PKG_VERSION"),
            duration_seconds,
            output_sha256: sha256_hex(output),
            output_bytes: output.len(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `out.csv` -> `out.csv.manifest.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
