//! Per-stage run manifests: one NDJSON file listing the tool version, a hash
//! of the effective configuration and the SHA-256 of every input and output.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::fsutil::write_file;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line<'a> {
    Run { stage: &'a str, tool: &'a str, version: &'a str, config_hash: &'a str },
    Input { path: &'a str, sha256: &'a str },
    Output { path: &'a str, sha256: &'a str },
}

#[derive(Default)]
pub struct Manifest {
    config_hash: String,
    inputs: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
}

impl Manifest {
    pub fn new<C: Serialize>(config: &C) -> Self {
        let bytes = serde_json::to_vec(config).expect("config serializes");
        Manifest { config_hash: sha256_hex(&bytes), ..Default::default() }
    }

    pub fn input(&mut self, name: impl Into<String>, bytes: &[u8]) {
        self.inputs.push((name.into(), sha256_hex(bytes)));
    }

    pub fn output(&mut self, name: impl Into<String>, bytes: &[u8]) {
        self.outputs.push((name.into(), sha256_hex(bytes)));
    }

    /// Writes `<out>/<stage>.manifest.ndjson` with entries sorted by path.
    pub fn write(mut self, out: &Path, stage: &str) -> Result<(), CliError> {
        self.inputs.sort();
        self.outputs.sort();
        let mut text = Vec::new();
        let mut push = |l: &Line| {
            serde_json::to_writer(&mut text, l).expect("manifest line serializes");
            text.push(b'\n');
        };
        push(&Line::Run { stage, tool: "pedsim", version: env!("CARGO_PKG_VERSION"), config_hash: &self.config_hash });
        for (path, sha256) in &self.inputs {
            push(&Line::Input { path, sha256 });
        }
        for (path, sha256) in &self.outputs {
            push(&Line::Output { path, sha256 });
        }
        write_file(&out.join(format!("{stage}.manifest.ndjson")), &text)
    }
}
