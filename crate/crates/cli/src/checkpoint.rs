//! Binary checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `AOIC` |
//! | 4 | `u32` format version |
//! | 4 | `u32` header length `L` |
//! | L | UTF-8 JSON [`CheckpointHeader`] |
//! | 8 | `u64` value count `N` |
//! | 8N | `f64` values, sections back to back |
//! | 4 | `u32` CRC-32 of everything above |

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use uav_aoi_core::nn::{NetworkParams, ParamShape, PARAMS_VERSION};

pub const MAGIC: [u8; 4] = *b"AOIC";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint {} not found", .0.display())]
    NotFound(PathBuf),
    #[error("checkpoint io: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint (bad magic)")]
    Magic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checkpoint has {0} trailing bytes")]
    Trailing(usize),
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("bad checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("header describes {expected} values but {got} are stored")]
    Count { expected: usize, got: usize },
    #[error("checkpoint has no section named {0}")]
    MissingSection(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub manifest: Vec<ParamShape>,
    /// Whatever the owner needs to rebuild the network.
    pub config: serde_json::Value,
}

impl Section {
    pub fn len(&self) -> usize {
        self.manifest.iter().map(ParamShape::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub params_version: u32,
    pub sections: Vec<Section>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub values: Vec<f64>,
}

impl Default for Checkpoint {
    fn default() -> Self {
        Checkpoint {
            header: CheckpointHeader { params_version: PARAMS_VERSION, sections: Vec::new(), meta: serde_json::Value::Null },
            values: Vec::new(),
        }
    }
}

impl Checkpoint {
    pub fn push(&mut self, name: &str, params: &NetworkParams, config: serde_json::Value) {
        self.header.sections.push(Section { name: name.to_owned(), manifest: params.manifest.clone(), config });
        self.values.extend_from_slice(&params.values);
    }

    /// The named section's parameters and config.
    pub fn section(&self, name: &str) -> Result<(NetworkParams, &serde_json::Value), CheckpointError> {
        let mut at = 0;
        for s in &self.header.sections {
            let len = s.len();
            if s.name == name {
                let values = self.values[at..at + len].to_vec();
                let params = NetworkParams { version: self.header.params_version, manifest: s.manifest.clone(), values };
                return Ok((params, &s.config));
            }
            at += len;
        }
        Err(CheckpointError::MissingSection(name.to_owned()))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CheckpointError> {
        let header = serde_json::to_vec(&self.header)?;
        let mut out = Vec::with_capacity(24 + header.len() + 8 * self.values.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < 4 + 4 + 4 + 8 + 4 {
            return Err(if bytes.starts_with(&MAGIC) || bytes.len() < 4 { CheckpointError::Truncated } else { CheckpointError::Magic });
        }
        if bytes[..4] != MAGIC {
            return Err(CheckpointError::Magic);
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(CheckpointError::Checksum { stored, computed });
        }
        let mut r = Reader { bytes: body, at: 4 };
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let header_len = r.u32()? as usize;
        let header: CheckpointHeader = serde_json::from_slice(r.take(header_len)?)?;
        let count = usize::try_from(r.u64()?).map_err(|_| CheckpointError::Truncated)?;
        let raw = r.take(count.checked_mul(8).ok_or(CheckpointError::Truncated)?)?;
        if r.at != body.len() {
            return Err(CheckpointError::Trailing(body.len() - r.at));
        }
        let values: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let expected: usize = header.sections.iter().map(Section::len).sum();
        if expected != values.len() {
            return Err(CheckpointError::Count { expected, got: values.len() });
        }
        Ok(Checkpoint { header, values })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = fs::read(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => CheckpointError::NotFound(path.to_owned()),
            _ => CheckpointError::Io(e),
        })?;
        Checkpoint::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(CheckpointError::Truncated)?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
