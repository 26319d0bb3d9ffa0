use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::Command;
use crate::error::{Error, Result};

/// Everything needed to repeat a run: command, flags, seeds, input digests,
/// and tool version. Output-location and thread-count flags are left out
/// since they never change the artifacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub flags: Value,
    pub seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub derived_seeds: Vec<u64>,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub flag: &'static str,
    pub path: String,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(cmd: &Command, seed: u64, inputs: &[(&'static str, &Path)]) -> Result<Self> {
        let flags = match serde_json::to_value(cmd)? {
            Value::Object(mut m) => m.remove(cmd.name()).unwrap_or(Value::Null),
            other => other,
        };
        let inputs = inputs
            .iter()
            .map(|&(flag, p)| {
                Ok(InputDigest {
                    flag,
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: cmd.name(),
            flags,
            seed,
            derived_seeds: Vec::new(),
            inputs,
        })
    }

    pub fn with_derived_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.derived_seeds = seeds;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        super::out_file(dir, "manifest.json", self.to_json()?.as_bytes())
    }
}
