use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};

/// Stamp written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub workers: usize,
    /// Command-line arguments after parsing.
    pub args: serde_json::Value,
    /// Effective library configuration.
    pub config: serde_json::Value,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    pub csv_schemas: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub crc32: String,
}

impl InputFile {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        Ok(InputFile { path: path.display().to_string(), crc32: format!("{:08x}", crc32fast::hash(&bytes)) })
    }
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, args: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            seed,
            workers: rayon::current_num_threads(),
            args,
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            csv_schemas: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputFile::read(path)?);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        crate::output::write_json(&dir.join("manifest.json"), self)
    }
}
