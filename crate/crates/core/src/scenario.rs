//! Problem instances: ground nodes, channel constants and UAV kinematics.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;

/// Reference channel gain at 1 m used when a scenario does not set one (-30 dB).
pub const DEFAULT_BETA0: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario must contain at least one node")]
    NoNodes,
    #[error("node {id}: location must be finite")]
    NonFiniteLocation { id: usize },
    #[error("node {id}: battery must be positive")]
    NonPositiveBattery { id: usize },
    #[error("node {id}: weight must be non-negative")]
    NegativeWeight { id: usize },
    #[error("node {id}: aoi floor must be non-negative")]
    NegativeAoiFloor { id: usize },
    #[error("node id {id} appears more than once")]
    DuplicateId { id: usize },
    #[error("node weights must not all be zero")]
    ZeroWeights,
    #[error("channel parameter {name} must be strictly positive and finite")]
    Channel { name: &'static str },
    #[error("uav parameter {name} is invalid: {reason}")]
    Uav { name: &'static str, reason: &'static str },
    #[error("region side must be positive and finite")]
    Region,
    #[error("final location is unreachable within the horizon along the {axis} axis")]
    Unreachable { axis: char },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    /// Ground position (x, y) in meters.
    pub location: [f64; 2],
    /// Battery capacity in joules.
    pub battery: f64,
    /// Importance weight, normalized across the scenario.
    pub weight: f64,
    /// Minimum AoI in seconds. Only used for AoI traces.
    pub aoi_floor: f64,
}

impl Node {
    pub fn new(id: usize, location: [f64; 2], battery: f64, weight: f64) -> Self {
        Node { id, location, battery, weight, aoi_floor: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Channel power gain at the 1 m reference distance.
    pub beta0: f64,
    /// Receiver noise power in watts.
    pub noise_power: f64,
    /// Update packet size in bits.
    pub packet_bits: f64,
    /// Bandwidth in hertz.
    pub bandwidth: f64,
}

impl Default for ChannelParams {
    /// B = 1 MHz, S = 10 Mbit, noise at -100 dBm.
    fn default() -> Self {
        ChannelParams { beta0: DEFAULT_BETA0, noise_power: 1e-13, packet_bits: 1e7, bandwidth: 1e6 }
    }
}

impl ChannelParams {
    /// `2^(S/B) - 1`, the Shannon spectral factor of one update.
    pub fn spectral_factor(&self) -> f64 {
        math::pow(2.0, self.packet_bits / self.bandwidth) - 1.0
    }

    /// Joules per square meter of squared UAV-node distance: `sigma^2 (2^(S/B)-1) / beta0`.
    pub fn energy_per_square_meter(&self) -> f64 {
        self.noise_power * self.spectral_factor() / self.beta0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavParams {
    pub altitude: f64,
    /// Per-axis speed limits in m/s. `f64::INFINITY` disables the limit.
    pub vmax_x: f64,
    pub vmax_y: f64,
    pub initial: [f64; 2],
    #[serde(rename = "final")]
    pub final_location: [f64; 2],
    /// Mission horizon in seconds.
    pub horizon: f64,
}

impl UavParams {
    pub fn new(initial: [f64; 2], final_location: [f64; 2], vmax: f64, horizon: f64) -> Self {
        UavParams { altitude: 80.0, vmax_x: vmax, vmax_y: vmax, initial, final_location, horizon }
    }

    pub fn unlimited_speed(&self) -> bool {
        self.vmax_x.is_infinite() && self.vmax_y.is_infinite()
    }
}

/// A validated problem instance. Weights always sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    region: f64,
    nodes: Vec<Node>,
    channel: ChannelParams,
    uav: UavParams,
}

impl Scenario {
    /// Validates every invariant and renormalizes the node weights.
    pub fn new(
        region: f64,
        mut nodes: Vec<Node>,
        channel: ChannelParams,
        uav: UavParams,
    ) -> Result<Self, ScenarioError> {
        if !(region > 0.0 && region.is_finite()) {
            return Err(ScenarioError::Region);
        }
        if nodes.is_empty() {
            return Err(ScenarioError::NoNodes);
        }
        let mut ids: Vec<usize> = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let id = node.id;
            if !(node.location[0].is_finite() && node.location[1].is_finite()) {
                return Err(ScenarioError::NonFiniteLocation { id });
            }
            if !(node.battery > 0.0 && node.battery.is_finite()) {
                return Err(ScenarioError::NonPositiveBattery { id });
            }
            if !(node.weight >= 0.0 && node.weight.is_finite()) {
                return Err(ScenarioError::NegativeWeight { id });
            }
            if !(node.aoi_floor >= 0.0 && node.aoi_floor.is_finite()) {
                return Err(ScenarioError::NegativeAoiFloor { id });
            }
            if ids.contains(&id) {
                return Err(ScenarioError::DuplicateId { id });
            }
            ids.push(id);
        }
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        if total <= 0.0 {
            return Err(ScenarioError::ZeroWeights);
        }
        // Already-normalized weights are left untouched so save/load is bit-exact.
        if (total - 1.0).abs() > 1e-12 {
            for node in &mut nodes {
                node.weight /= total;
            }
        }

        let positive = |v: f64| v > 0.0 && v.is_finite();
        for (name, value) in [
            ("beta0", channel.beta0),
            ("noise_power", channel.noise_power),
            ("packet_bits", channel.packet_bits),
            ("bandwidth", channel.bandwidth),
        ] {
            if !positive(value) {
                return Err(ScenarioError::Channel { name });
            }
        }

        if !positive(uav.altitude) {
            return Err(ScenarioError::Uav { name: "altitude", reason: "must be positive" });
        }
        if !positive(uav.horizon) {
            return Err(ScenarioError::Uav { name: "horizon", reason: "must be positive" });
        }
        for (name, v) in [("vmax_x", uav.vmax_x), ("vmax_y", uav.vmax_y)] {
            if !(v > 0.0) {
                return Err(ScenarioError::Uav { name, reason: "must be positive" });
            }
        }
        for (name, p) in [("initial", uav.initial), ("final", uav.final_location)] {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(ScenarioError::Uav { name, reason: "must be finite" });
            }
        }
        if (uav.final_location[0] - uav.initial[0]).abs() > uav.vmax_x * uav.horizon {
            return Err(ScenarioError::Unreachable { axis: 'x' });
        }
        if (uav.final_location[1] - uav.initial[1]).abs() > uav.vmax_y * uav.horizon {
            return Err(ScenarioError::Unreachable { axis: 'y' });
        }

        Ok(Scenario { region, nodes, channel, uav })
    }

    pub fn region(&self) -> f64 {
        self.region
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    pub fn uav(&self) -> &UavParams {
        &self.uav
    }

    pub fn horizon(&self) -> f64 {
        self.uav.horizon
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }

    /// Energy of one update received directly above a node.
    pub fn overhead_update_energy(&self) -> f64 {
        self.channel.energy_per_square_meter() * self.uav.altitude * self.uav.altitude
    }

    /// Returns a copy with the given horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self, ScenarioError> {
        let mut uav = self.uav.clone();
        uav.horizon = horizon;
        Scenario::new(self.region, self.nodes.clone(), self.channel.clone(), uav)
    }

    /// Returns a copy with both per-axis speed limits set to `vmax`.
    pub fn with_speed(&self, vmax: f64) -> Result<Self, ScenarioError> {
        let mut uav = self.uav.clone();
        uav.vmax_x = vmax;
        uav.vmax_y = vmax;
        Scenario::new(self.region, self.nodes.clone(), self.channel.clone(), uav)
    }

    pub fn with_channel(&self, channel: ChannelParams) -> Result<Self, ScenarioError> {
        Scenario::new(self.region, self.nodes.clone(), channel, self.uav.clone())
    }

    pub fn with_uav(&self, uav: UavParams) -> Result<Self, ScenarioError> {
        Scenario::new(self.region, self.nodes.clone(), self.channel.clone(), uav)
    }

    pub fn with_nodes(&self, nodes: Vec<Node>) -> Result<Self, ScenarioError> {
        Scenario::new(self.region, nodes, self.channel.clone(), self.uav.clone())
    }
}

/// Constants shared by every randomly generated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub channel: ChannelParams,
    pub altitude: f64,
    pub vmax: f64,
    pub horizon: f64,
    /// Batteries are drawn uniformly from this range (joules).
    pub battery_range: (f64, f64),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            channel: ChannelParams::default(),
            altitude: 80.0,
            vmax: 25.0,
            horizon: 900.0,
            battery_range: (0.1, 1.0),
        }
    }
}

/// Random scenario with the default simulation constants.
///
/// Node and endpoint coordinates are uniform on `[0, region]`, batteries
/// uniform on `[0.1, 1.0]` J, weights uniform then normalized.
pub fn generate_scenario(m: usize, seed: u64, region: f64) -> Result<Scenario, ScenarioError> {
    generate_with(m, seed, region, &GeneratorConfig::default())
}

/// Endpoints are drawn before the nodes, so for a fixed seed the first `k`
/// nodes and both endpoints do not depend on `m`.
pub fn generate_with(
    m: usize,
    seed: u64,
    region: f64,
    config: &GeneratorConfig,
) -> Result<Scenario, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = [rng.gen_range(0.0..=region), rng.gen_range(0.0..=region)];
    let final_location = [rng.gen_range(0.0..=region), rng.gen_range(0.0..=region)];
    let (lo, hi) = config.battery_range;
    let nodes = (0..m)
        .map(|id| {
            let x = rng.gen_range(0.0..=region);
            let y = rng.gen_range(0.0..=region);
            let u: f64 = rng.gen();
            let weight: f64 = rng.gen();
            Node::new(id, [x, y], lo + (hi - lo) * u, weight)
        })
        .collect();
    let uav = UavParams {
        altitude: config.altitude,
        vmax_x: config.vmax,
        vmax_y: config.vmax,
        initial,
        final_location,
        horizon: config.horizon,
    };
    Scenario::new(region, nodes, config.channel.clone(), uav)
}
