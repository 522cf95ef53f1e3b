//! CSV and JSON result files.
//!
//! Every CSV has a header row. Schema versions are recorded in the run
//! manifest under `csv_schemas`:
//!
//! | file | version | columns |
//! |------|---------|---------|
//! | `trajectory.csv` | 1 | `index,t_s,x_m,y_m,node` (node is 1-based, empty at the endpoints) |
//! | `aoi_trace.csv` | 1 | `t_s,node,aoi_s` |
//! | `table.csv` | 1 | `schedule,counts,nwaoi,status` |
//! | `curve.csv` | 1 | `episode,return,nwaoi,epsilon,loss` |
//! | `search.csv` | 1 | `k_c,k_h,test_mse` |
//! | `sweep.csv` | 1 | `axis,value,policy,mean_nwaoi,stderr,g_min,samples` |

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use uav_aoi_core::agents::CurvePoint;
use uav_aoi_core::enumerator::TableRow;
use uav_aoi_core::physics::AoiTrace;
use uav_aoi_core::{Scenario, SchedulePolicy, TrajectorySolution};

use crate::sweep::SweepRow;

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub fn csv_schemas(files: &[&str]) -> BTreeMap<String, u32> {
    files.iter().map(|f| (f.to_string(), CSV_SCHEMA_VERSION)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// Schedule as 1-based node numbers joined by `-`.
pub fn schedule_label(u: &SchedulePolicy) -> String {
    u.order().iter().map(|m| (m + 1).to_string()).collect::<Vec<_>>().join("-")
}

/// JSON cannot hold infinities.
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn write_trajectory(path: &Path, s: &Scenario, sol: &TrajectorySolution) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["index", "t_s", "x_m", "y_m", "node"])?;
    let rows = sol.trajectory_table(s);
    let last = rows.len() - 1;
    for (i, r) in rows.iter().enumerate() {
        let node = if i == 0 || i == last { String::new() } else { (sol.policy.order()[i - 1] + 1).to_string() };
        w.write_record([i.to_string(), r[0].to_string(), r[1].to_string(), r[2].to_string(), node])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aoi_trace(path: &Path, trace: &AoiTrace) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t_s", "node", "aoi_s"])?;
    for (m, values) in trace.values.iter().enumerate() {
        for (t, a) in trace.t.iter().zip(values) {
            w.write_record([t.to_string(), (m + 1).to_string(), a.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["schedule", "counts", "nwaoi", "status"])?;
    for r in rows {
        let counts = r.counts.iter().map(usize::to_string).collect::<Vec<_>>().join("-");
        let status = serde_json::to_value(r.status)?.as_str().unwrap_or_default().to_owned();
        w.write_record([schedule_label(&r.policy), counts, r.objective.to_string(), status])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["episode", "return", "nwaoi", "epsilon", "loss"])?;
    for p in curve {
        w.write_record([p.episode.to_string(), p.ret.to_string(), p.score.to_string(), p.epsilon.to_string(), p.loss.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_search(path: &Path, grid: &[(usize, usize, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["k_c", "k_h", "test_mse"])?;
    for (kc, kh, mse) in grid {
        w.write_record([kc.to_string(), kh.to_string(), mse.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["axis", "value", "policy", "mean_nwaoi", "stderr", "g_min", "samples"])?;
    for r in rows {
        w.write_record([
            r.axis.to_string(),
            r.value.to_string(),
            r.policy.to_string(),
            r.mean.to_string(),
            r.stderr.to_string(),
            r.g_min.to_string(),
            r.samples.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
