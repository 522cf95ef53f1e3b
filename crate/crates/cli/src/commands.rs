use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use uav_aoi_core::agents::{AutoencoderRepr, Representation, SearchSpace};
use uav_aoi_core::bounds::{bound_report, lower_bound};
use uav_aoi_core::enumerator::enumerate_optimal;
use uav_aoi_core::physics::{aoi_trace, nwaoi};
use uav_aoi_core::qp::{solve_schedule, solve_schedule_default, Multipliers};
use uav_aoi_core::scenario::{generate_with, GeneratorConfig};
use uav_aoi_core::{Scenario, SchedulePolicy, SolveStatus};

use crate::checkpoint::Checkpoint;
use crate::cli::*;
use crate::error::{CliError, ExitKind};
use crate::manifest::RunManifest;
use crate::output::{self, csv_schemas, finite, write_json};
use crate::policy::{self, PolicyKind, PolicySettings, TrainedAgent};
use crate::scenario_io::{load_scenario, save_scenario};
use crate::sweep::{run_sweep, SweepSpec};

/// Runs a command and returns its exit kind; errors carry their own.
pub fn run(command: &Command) -> Result<ExitKind> {
    let args = serde_json::to_value(command)?;
    let args = args.as_object().and_then(|o| o.values().next().cloned()).unwrap_or_default();
    match command {
        Command::Generate(a) => generate(a, args),
        Command::Solve(a) => solve(a, args),
        Command::Bounds(a) => bounds(a, args),
        Command::Enumerate(a) => enumerate(a, args),
        Command::TrainDqn(a) => train_dqn(a, args),
        Command::TrainAutoencoder(a) => train_autoencoder(a, args),
        Command::Eval(a) => eval(a, args),
        Command::Sweep(a) => sweep(a, args),
    }
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn scenario_input(path: &Path, manifest: &mut RunManifest) -> Result<Scenario> {
    let s = load_scenario(path).with_context(|| format!("loading {}", path.display()))?;
    manifest.input(path)?;
    Ok(s)
}

fn settings(path: Option<&Path>, manifest: &mut RunManifest) -> Result<PolicySettings> {
    match path {
        None => Ok(PolicySettings::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::new(ExitKind::MissingArtifact, anyhow::anyhow!("reading {}: {e}", p.display())))?;
            manifest.input(p)?;
            toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())).into())
        }
    }
}

fn parse_schedule(text: &str, num_nodes: usize) -> Result<SchedulePolicy> {
    let mut order = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: usize = part.parse().map_err(|_| CliError::usage(format!("bad node number {part:?} in schedule")))?;
        if m == 0 || m > num_nodes {
            return Err(CliError::usage(format!("schedule node {m} is outside 1..={num_nodes}")).into());
        }
        order.push(m - 1);
    }
    Ok(SchedulePolicy::new(order))
}

fn one_based(u: &SchedulePolicy) -> Vec<usize> {
    u.order().iter().map(|m| m + 1).collect()
}

/// NWAoI of a schedule recomputed from re-solved update times.
fn recompute(s: &Scenario, u: &SchedulePolicy) -> Result<Option<f64>> {
    let sol = solve_schedule_default(s, u)?;
    Ok(sol.is_optimal().then(|| nwaoi(s, &sol.per_node_times(s.num_nodes()))))
}

fn generate(a: &GenerateArgs, args: serde_json::Value) -> Result<ExitKind> {
    let mut manifest = RunManifest::new("generate", Some(a.seed), args);
    let mut gen = GeneratorConfig {
        vmax: a.vmax,
        horizon: a.horizon,
        battery_range: (a.battery_min, a.battery_max),
        ..GeneratorConfig::default()
    };
    if let Some(b) = a.beta0 {
        gen.channel.beta0 = b;
    }
    if a.nodes == 0 || !(a.battery_min > 0.0 && a.battery_min <= a.battery_max) {
        return Err(CliError::usage("need at least one node and 0 < battery-min <= battery-max").into());
    }
    let s = generate_with(a.nodes, a.seed, a.region, &gen).map_err(|e| CliError::new(ExitKind::Usage, e))?;
    out_dir(&a.out)?;
    save_scenario(&s, &a.out.join("scenario.toml"))?;
    manifest.config = serde_json::to_value(&gen)?;
    manifest.outputs = vec!["scenario.toml".into()];
    manifest.write(&a.out)?;
    Ok(ExitKind::Success)
}

#[derive(Serialize)]
struct SolveDocument {
    status: SolveStatus,
    nwaoi: Option<f64>,
    schedule: Vec<usize>,
    times_s: Vec<f64>,
    waypoints_m: Vec<[f64; 2]>,
    update_energy_j: Vec<f64>,
    kkt_residual: Option<f64>,
    iterations: usize,
    coincident: Vec<usize>,
    multipliers: Multipliers,
}

fn solve(a: &SolveArgs, args: serde_json::Value) -> Result<ExitKind> {
    let mut manifest = RunManifest::new("solve", None, args);
    let s = scenario_input(&a.scenario, &mut manifest)?;
    let u = parse_schedule(&a.schedule, s.num_nodes())?;
    let sol = solve_schedule(&s, &u, a.tol)?;
    out_dir(&a.out)?;
    let optimal = sol.is_optimal();
    let doc = SolveDocument {
        status: sol.status,
        nwaoi: finite(sol.objective),
        schedule: one_based(&u),
        times_s: sol.times.clone(),
        waypoints_m: sol.waypoints.clone(),
        update_energy_j: if optimal { sol.update_energies(&s) } else { Vec::new() },
        kkt_residual: finite(sol.kkt_residual),
        iterations: sol.iterations,
        coincident: sol.coincident.clone(),
        multipliers: sol.multipliers.clone(),
    };
    write_json(&a.out.join("solution.json"), &doc)?;
    manifest.outputs.push("solution.json".into());
    if optimal {
        output::write_trajectory(&a.out.join("trajectory.csv"), &s, &sol)?;
        let trace = aoi_trace(&s, &sol.per_node_times(s.num_nodes()), a.grid);
        output::write_aoi_trace(&a.out.join("aoi_trace.csv"), &trace)?;
        manifest.outputs.extend(["trajectory.csv".into(), "aoi_trace.csv".into()]);
        manifest.csv_schemas = csv_schemas(&["trajectory.csv", "aoi_trace.csv"]);
    }
    manifest.write(&a.out)?;
    if optimal {
        Ok(ExitKind::Success)
    } else {
        eprintln!("schedule is {}", serde_json::to_value(sol.status)?.as_str().unwrap_or("not solved"));
        Ok(ExitKind::Solver)
    }
}

#[derive(Serialize)]
struct BoundsDocument {
    n_bar: Vec<usize>,
    g_min: f64,
    /// `(time_s, node)` of the uniform schedule.
    uniform_times: Vec<(f64, usize)>,
    divisor_ok: bool,
    offending_pair: Option<(usize, usize)>,
    v_bar_min: Option<f64>,
    v_bar_min_reason: Option<String>,
    weight_guidance: Vec<f64>,
}

fn bounds(a: &BoundsArgs, args: serde_json::Value) -> Result<ExitKind> {
    let mut manifest = RunManifest::new("bounds", None, args);
    let s = scenario_input(&a.scenario, &mut manifest)?;
    let r = bound_report(&s);
    let reason = match (r.v_bar_min, r.offending_pair) {
        (Some(_), _) => None,
        (None, Some((i, j))) => Some(format!(
            "divisor condition fails for nodes {} and {}: n_bar + 1 values {} and {} share a factor",
            i + 1,
            j + 1,
            r.n_bar[i] + 1,
            r.n_bar[j] + 1
        )),
        (None, None) => Some("speed bound undefined for this scenario".into()),
    };
    let doc = BoundsDocument {
        n_bar: r.n_bar.clone(),
        g_min: r.g_min,
        uniform_times: r.uniform_times.iter().map(|u| (u.time, u.node + 1)).collect(),
        divisor_ok: r.divisor_ok,
        offending_pair: r.offending_pair.map(|(i, j)| (i + 1, j + 1)),
        v_bar_min: r.v_bar_min,
        v_bar_min_reason: reason,
        weight_guidance: r.weight_guidance.clone(),
    };
    out_dir(&a.out)?;
    write_json(&a.out.join("bounds.json"), &doc)?;
    manifest.outputs.push("bounds.json".into());
    manifest.write(&a.out)?;
    Ok(ExitKind::Success)
}

fn enumerate(a: &EnumerateArgs, args: serde_json::Value) -> Result<ExitKind> {
    let mut manifest = RunManifest::new("enumerate", None, args);
    let s = scenario_input(&a.scenario, &mut manifest)?;
    let cfg = uav_aoi_core::enumerator::EnumeratorConfig {
        cap: a.cap,
        include_zero: !a.no_zero,
        budget: a.budget,
        ..Default::default()
    };
    manifest.config = serde_json::to_value(cfg)?;
    let e = enumerate_optimal(&s, &cfg)?;
    out_dir(&a.out)?;
    let doc = json!({
        "schedule": one_based(&e.best.policy),
        "counts": e.best.policy.counts(s.num_nodes()),
        "nwaoi": finite(e.best.objective),
        "times_s": e.best.times,
        "waypoints_m": e.best.waypoints,
        "lower_bound": lower_bound(&s),
        "solves": e.table.len(),
    });
    write_json(&a.out.join("enumeration.json"), &doc)?;
    output::write_table(&a.out.join("table.csv"), &e.table)?;
    manifest.outputs = vec!["enumeration.json".into(), "table.csv".into()];
    manifest.csv_schemas = csv_schemas(&["table.csv"]);
    manifest.write(&a.out)?;
    Ok(ExitKind::Success)
}

fn train_dqn(a: &TrainDqnArgs, args: serde_json::Value) -> Result<ExitKind> {
    let mut manifest = RunManifest::new("train-dqn", Some(a.seed), args);
    let s = scenario_input(&a.scenario, &mut manifest)?;
    let mut st = settings(a.config.as_deref(), &mut manifest)?;
    st.dqn.seed = a.seed;
    st.autoencoder.seed = a.seed;
    if let Some(e) = a.episodes {
        st.dqn.episodes = e;
    }
    let repr = match a.representation {
        ReprKind::LastColumn => policy::last_column(&s),
        ReprKind::Autoencoder => Representation::Autoencoder(match &a.autoencoder {
            Some(path) => {
                let ck = Checkpoint::load(path)?;
                manifest.input(path)?;
                policy::autoencoder_from_checkpoint(&ck)?
            }
            None => policy::autoencoder_repr(&policy::fit_autoencoder(&s, &st)?),
        }),
    };
    manifest.config = serde_json::to_value(&st)?;
    let (agent, curve) = policy::train_agent(&s, repr, &st.dqn, st.env)?;
    let greedy = agent.greedy(&s)?;
    out_dir(&a.out)?;
    let mut ck = agent.to_checkpoint();
    ck.header.meta = json!({ "seed": a.seed, "scenario": a.scenario.display().to_string() });
    ck.save(&a.out.join("agent.aoic"))?;
    output::write_curve(&a.out.join("curve.csv"), &curve)?;
    write_json(&a.out.join("greedy.json"), &json!({ "schedule": one_based(&greedy.policy), "nwaoi": greedy.nwaoi }))?;
    manifest.outputs = vec!["agent.aoic".into(), "curve.csv".into(), "greedy.json".into()];
    manifest.csv_schemas = csv_schemas(&["curve.csv"]);
    manifest.write(&a.out)?;
    Ok(ExitKind::Success)
}

fn train_autoencoder(a: &TrainAutoencoderArgs, args: serde_json::Value) -> Result<ExitKind> {
    let mut manifest = RunManifest::new("train-autoencoder", Some(a.seed), args);
    let s = scenario_input(&a.scenario, &mut manifest)?;
    let mut st = settings(a.config.as_deref(), &mut manifest)?;
    st.autoencoder.seed = a.seed;
    if let Some(e) = a.episodes {
        st.search_episodes = e;
    }
    if let Some(e) = a.epochs {
        st.autoencoder.epochs = e;
    }
    if !a.kc.is_empty() {
        if !a.k.is_empty() {
            return Err(CliError::usage("use either --k or --kc/--kh").into());
        }
        st.search = SearchSpace::Padded { kc: a.kc.clone(), kh: a.kh.clone() };
    } else if !a.k.is_empty() {
        st.search = SearchSpace::Joint(a.k.clone());
    }
    if st.search.grid().iter().any(|&(c, h)| c == 0 || h == 0) {
        return Err(CliError::usage("autoencoder sizes must be positive").into());
    }
    manifest.config = serde_json::to_value(&st)?;
    let result = policy::fit_autoencoder(&s, &st)?;
    out_dir(&a.out)?;
    let mut ck = Checkpoint::default();
    policy::push_autoencoder(&mut ck, &AutoencoderRepr::with_cell_size(result.model.clone(), result.k_c));
    ck.header.meta = json!({ "seed": a.seed, "scenario": a.scenario.display().to_string() });
    ck.save(&a.out.join("autoencoder.aoic"))?;
    output::write_search(&a.out.join("search.csv"), &result.grid)?;
    write_json(
        &a.out.join("report.json"),
        &json!({
            "k_c": result.k_c,
            "k_h": result.k_h,
            "test_mse": result.test_mse,
            "corpus_size": result.corpus_size,
            "report": result.report,
        }),
    )?;
    manifest.outputs = vec!["autoencoder.aoic".into(), "search.csv".into(), "report.json".into()];
    manifest.csv_schemas = csv_schemas(&["search.csv"]);
    manifest.write(&a.out)?;
    Ok(ExitKind::Success)
}

fn eval(a: &EvalArgs, args: serde_json::Value) -> Result<ExitKind> {
    let mut manifest = RunManifest::new("eval", Some(a.seed), args);
    let s = scenario_input(&a.scenario, &mut manifest)?;
    let mut st = settings(a.config.as_deref(), &mut manifest)?;
    st.enumerator.budget = a.budget;
    let outcome = match a.policy {
        PolicyKind::Enumerate | PolicyKind::Weight => policy::run_policy(a.policy, &s, a.seed, &st)?,
        PolicyKind::Dqn | PolicyKind::DqnLstm => {
            let path = a
                .checkpoint
                .as_ref()
                .ok_or_else(|| CliError::new(ExitKind::MissingArtifact, anyhow::anyhow!("--checkpoint is required for {}", a.policy)))?;
            let ck = Checkpoint::load(path)?;
            manifest.input(path)?;
            let agent = TrainedAgent::from_checkpoint(&ck)?;
            let lstm = matches!(agent.repr, Representation::Autoencoder(_));
            if lstm != (a.policy == PolicyKind::DqnLstm) {
                bail!(CliError::usage(format!("checkpoint does not hold a {} agent", a.policy)));
            }
            agent.greedy(&s)?
        }
    };
    manifest.config = serde_json::to_value(&st)?;
    out_dir(&a.out)?;
    let doc = json!({
        "policy": a.policy.to_string(),
        "schedule": one_based(&outcome.policy),
        "nwaoi": finite(outcome.nwaoi),
        "recomputed_nwaoi": recompute(&s, &outcome.policy)?,
        "lower_bound": lower_bound(&s),
    });
    write_json(&a.out.join("eval.json"), &doc)?;
    manifest.outputs = vec!["eval.json".into()];
    manifest.write(&a.out)?;
    Ok(ExitKind::Success)
}

fn sweep(a: &SweepArgs, args: serde_json::Value) -> Result<ExitKind> {
    let mut manifest = RunManifest::new("sweep", Some(a.seed), args);
    let template = scenario_input(&a.scenario, &mut manifest)?;
    let mut st = settings(a.config.as_deref(), &mut manifest)?;
    st.enumerator.budget = a.budget;
    if let Some(e) = a.episodes {
        st.dqn.episodes = e;
    }
    let lo = template.nodes().iter().map(|n| n.battery).fold(f64::INFINITY, f64::min);
    let hi = template.nodes().iter().map(|n| n.battery).fold(0.0, f64::max);
    let range = (a.battery_min.unwrap_or(lo), a.battery_max.unwrap_or(hi));
    if !(range.0 > 0.0 && range.0 <= range.1) || a.seeds == 0 {
        return Err(CliError::usage("need 0 < battery-min <= battery-max and at least one seed").into());
    }
    let spec = SweepSpec {
        template,
        battery_range: range,
        axis: a.axis,
        values: a.values.clone(),
        policies: a.policies.clone(),
        seeds: (a.seed..a.seed + a.seeds).collect(),
        settings: st,
    };
    manifest.config = json!({ "battery_range": range, "settings": spec.settings });
    let rows = run_sweep(&spec)?;
    out_dir(&a.out)?;
    output::write_sweep(&a.out.join("sweep.csv"), &rows)?;
    manifest.outputs = vec!["sweep.csv".into()];
    manifest.csv_schemas = csv_schemas(&["sweep.csv"]);
    manifest.write(&a.out)?;
    Ok(ExitKind::Success)
}
