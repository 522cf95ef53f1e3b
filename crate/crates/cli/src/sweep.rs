//! Parameter sweeps: mean NWAoI of each policy along one scenario axis.

use std::fmt;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use uav_aoi_core::bounds::lower_bound;
use uav_aoi_core::scenario::{generate_with, GeneratorConfig};
use uav_aoi_core::{Node, Scenario};

use crate::policy::{run_policy, PolicyKind, PolicySettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Number of ground nodes.
    Nodes,
    /// Battery of every node, joules.
    Energy,
    /// Mission horizon, seconds.
    Horizon,
    /// Per-axis speed limit, m/s.
    Speed,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Nodes => "nodes",
            Axis::Energy => "energy",
            Axis::Horizon => "horizon",
            Axis::Speed => "speed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Source of the region, channel, UAV and node count.
    pub template: Scenario,
    /// Batteries of randomized nodes are drawn from this range.
    pub battery_range: (f64, f64),
    pub axis: Axis,
    pub values: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    pub settings: PolicySettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: Axis,
    pub value: f64,
    pub policy: PolicyKind,
    pub mean: f64,
    /// Standard error of the mean over seeds.
    pub stderr: f64,
    /// Mean of the NWAoI lower bound over seeds.
    pub g_min: f64,
    pub samples: usize,
}

/// The scenario of one sweep cell.
///
/// Node positions, weights, batteries and the UAV endpoints are drawn from
/// `seed`; the axis value then overrides node count, every battery, the
/// horizon or both speed limits. Node `k` is the same for every node count.
pub fn cell_scenario(spec: &SweepSpec, value: f64, seed: u64) -> Result<Scenario> {
    let t = &spec.template;
    let m = match spec.axis {
        Axis::Nodes => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                bail!("node count must be a positive integer, got {value}");
            }
            value as usize
        }
        _ => t.num_nodes(),
    };
    let gen = GeneratorConfig {
        channel: t.channel().clone(),
        altitude: t.uav().altitude,
        vmax: t.uav().vmax_x,
        horizon: t.horizon(),
        battery_range: spec.battery_range,
    };
    let base = generate_with(m, seed, t.region(), &gen)?;
    let mut uav = t.uav().clone();
    uav.initial = base.uav().initial;
    uav.final_location = base.uav().final_location;
    let s = base.with_uav(uav)?;
    Ok(match spec.axis {
        Axis::Nodes => s,
        Axis::Energy => {
            let nodes = s.nodes().iter().map(|n| Node { battery: value, ..n.clone() }).collect();
            s.with_nodes(nodes)?
        }
        Axis::Horizon => s.with_horizon(value)?,
        Axis::Speed => {
            let mut uav = s.uav().clone();
            uav.vmax_x = value;
            uav.vmax_y = value;
            s.with_uav(uav)?
        }
    })
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs every (value, seed) cell in parallel; rows come out ordered by
/// value, then policy.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.values.is_empty() || spec.policies.is_empty() || spec.seeds.is_empty() {
        bail!("sweep needs at least one value, policy and seed");
    }
    let cells: Vec<(usize, u64)> =
        (0..spec.values.len()).flat_map(|v| spec.seeds.iter().map(move |&s| (v, s))).collect();
    let results: Vec<(f64, Vec<f64>)> = cells
        .par_iter()
        .map(|&(v, seed)| {
            let s = cell_scenario(spec, spec.values[v], seed)?;
            let scores = spec
                .policies
                .iter()
                .map(|&p| run_policy(p, &s, seed, &spec.settings).map(|o| o.nwaoi))
                .collect::<Result<Vec<f64>>>()?;
            Ok((lower_bound(&s), scores))
        })
        .collect::<Result<_>>()?;

    let per_value = spec.seeds.len();
    let mut rows = Vec::with_capacity(spec.values.len() * spec.policies.len());
    for (v, &value) in spec.values.iter().enumerate() {
        let chunk = &results[v * per_value..(v + 1) * per_value];
        let g_min = chunk.iter().map(|c| c.0).sum::<f64>() / per_value as f64;
        for (p, &policy) in spec.policies.iter().enumerate() {
            let xs: Vec<f64> = chunk.iter().map(|c| c.1[p]).collect();
            let (mean, stderr) = mean_stderr(&xs);
            rows.push(SweepRow { axis: spec.axis, value, policy, mean, stderr, g_min, samples: xs.len() });
        }
    }
    Ok(rows)
}
