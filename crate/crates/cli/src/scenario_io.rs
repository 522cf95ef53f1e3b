//! TOML scenario documents.
//!
//! ```toml
//! format_version = 1
//! region = 1000.0
//!
//! [channel]
//! beta0 = 0.001          # optional
//! noise_power_w = 1e-13
//! packet_bits = 10000000.0
//! bandwidth_hz = 1000000.0
//!
//! [uav]
//! altitude_m = 80.0
//! vmax_x = 25.0          # inf for no limit
//! vmax_y = 25.0
//! initial = [0.0, 0.0]
//! final = [1000.0, 1000.0]
//! horizon_s = 900.0
//!
//! [[nodes]]
//! x = 120.0
//! y = 480.0
//! battery_j = 0.5
//! weight = 1.0
//! aoi_floor_s = 0.0      # optional
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use uav_aoi_core::scenario::{ScenarioError, DEFAULT_BETA0};
use uav_aoi_core::{ChannelParams, Node, Scenario, UavParams};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioIoError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize scenario: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ScenarioError),
}

impl ScenarioIoError {
    pub fn is_not_found(&self) -> bool {
        matches!(self, ScenarioIoError::Read { source, .. } if source.kind() == io::ErrorKind::NotFound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub format_version: u32,
    pub region: f64,
    pub channel: ChannelDocument,
    pub uav: UavDocument,
    pub nodes: Vec<NodeDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    #[serde(default = "default_beta0")]
    pub beta0: f64,
    pub noise_power_w: f64,
    pub packet_bits: f64,
    pub bandwidth_hz: f64,
}

fn default_beta0() -> f64 {
    DEFAULT_BETA0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavDocument {
    pub altitude_m: f64,
    pub vmax_x: f64,
    pub vmax_y: f64,
    pub initial: [f64; 2],
    #[serde(rename = "final")]
    pub final_location: [f64; 2],
    pub horizon_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    /// Defaults to the position in the list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<usize>,
    pub x: f64,
    pub y: f64,
    pub battery_j: f64,
    pub weight: f64,
    #[serde(default)]
    pub aoi_floor_s: f64,
}

impl From<&Scenario> for ScenarioDocument {
    fn from(s: &Scenario) -> Self {
        let c = s.channel();
        let u = s.uav();
        ScenarioDocument {
            format_version: FORMAT_VERSION,
            region: s.region(),
            channel: ChannelDocument {
                beta0: c.beta0,
                noise_power_w: c.noise_power,
                packet_bits: c.packet_bits,
                bandwidth_hz: c.bandwidth,
            },
            uav: UavDocument {
                altitude_m: u.altitude,
                vmax_x: u.vmax_x,
                vmax_y: u.vmax_y,
                initial: u.initial,
                final_location: u.final_location,
                horizon_s: u.horizon,
            },
            nodes: s
                .nodes()
                .iter()
                .map(|n| NodeDocument {
                    id: Some(n.id),
                    x: n.location[0],
                    y: n.location[1],
                    battery_j: n.battery,
                    weight: n.weight,
                    aoi_floor_s: n.aoi_floor,
                })
                .collect(),
        }
    }
}

impl ScenarioDocument {
    pub fn into_scenario(self) -> Result<Scenario, ScenarioIoError> {
        if self.format_version != FORMAT_VERSION {
            return Err(ScenarioIoError::Version(self.format_version));
        }
        let nodes = self
            .nodes
            .into_iter()
            .enumerate()
            .map(|(i, n)| Node {
                id: n.id.unwrap_or(i),
                location: [n.x, n.y],
                battery: n.battery_j,
                weight: n.weight,
                aoi_floor: n.aoi_floor_s,
            })
            .collect();
        let channel = ChannelParams {
            beta0: self.channel.beta0,
            noise_power: self.channel.noise_power_w,
            packet_bits: self.channel.packet_bits,
            bandwidth: self.channel.bandwidth_hz,
        };
        let u = self.uav;
        let uav = UavParams {
            altitude: u.altitude_m,
            vmax_x: u.vmax_x,
            vmax_y: u.vmax_y,
            initial: u.initial,
            final_location: u.final_location,
            horizon: u.horizon_s,
        };
        Ok(Scenario::new(self.region, nodes, channel, uav)?)
    }
}

pub fn scenario_from_str(text: &str) -> Result<Scenario, ScenarioIoError> {
    toml::from_str::<ScenarioDocument>(text)?.into_scenario()
}

pub fn scenario_to_string(s: &Scenario) -> Result<String, ScenarioIoError> {
    Ok(toml::to_string(&ScenarioDocument::from(s))?)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioIoError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioIoError::Read { path: path.to_owned(), source })?;
    scenario_from_str(&text)
}

pub fn save_scenario(s: &Scenario, path: &Path) -> Result<(), ScenarioIoError> {
    let text = scenario_to_string(s)?;
    fs::write(path, text).map_err(|source| ScenarioIoError::Write { path: path.to_owned(), source })
}
