//! Reproducibility record written next to every command's outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::RNG_IDENTITY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Fully resolved parameters; feeding this back through `--config`
    /// reproduces the run.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub rng: String,
    pub inputs: BTreeMap<String, InputDigest>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub counters: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config,
            seed,
            rng: RNG_IDENTITY.to_string(),
            inputs: BTreeMap::new(),
            timings: BTreeMap::new(),
            counters: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, role: &str, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.insert(
            role.to_string(),
            InputDigest {
                path: path.display().to_string(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            },
        );
        Ok(())
    }

    pub fn time(&mut self, stage: &str, start: Instant) {
        self.timings.insert(stage.to_string(), start.elapsed().as_secs_f64());
    }

    pub fn count(&mut self, name: &str, value: u64) {
        self.counters.insert(name.to_string(), value);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        crate::io::write_text(path, &text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Parameters stored in a config file: either a bare JSON object or a
/// manifest, in which case its `config` entry is used.
pub fn read_config(path: &Path) -> Result<serde_json::Map<String, serde_json::Value>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let value = match value {
        serde_json::Value::Object(mut obj) if obj.contains_key("subcommand") && obj.contains_key("config") => {
            obj.remove("config").expect("checked")
        }
        other => other,
    };
    match value {
        serde_json::Value::Object(obj) => Ok(obj),
        _ => Err(Error::config(format!("{}: config must be a JSON object", path.display()))),
    }
}
