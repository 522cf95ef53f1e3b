//! Scheduling policies behind one interface, and their checkpoints.

use std::fmt;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use uav_aoi_core::agents::{
    greedy_rollout, hyperparameter_search, train_dqn, weight_based_rollout, AoiTask, AutoencoderConfig, AutoencoderRepr,
    CurvePoint, DqnConfig, LastColumn, LstmAutoencoder, QAgent, Representation, SearchResult, SearchSpace, StateEncoder,
};
use uav_aoi_core::enumerator::{enumerate_optimal, EnumeratorConfig};
use uav_aoi_core::mdp::{AoiEnv, EnvConfig};
use uav_aoi_core::{Scenario, SchedulePolicy};

use crate::checkpoint::Checkpoint;

pub const Q_SECTION: &str = "q_network";
pub const AE_SECTION: &str = "autoencoder";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Enumerate,
    Weight,
    Dqn,
    DqnLstm,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Enumerate => "enumerate",
            PolicyKind::Weight => "weight",
            PolicyKind::Dqn => "dqn",
            PolicyKind::DqnLstm => "dqn-lstm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyOutcome {
    pub policy: SchedulePolicy,
    pub nwaoi: f64,
}

/// Knobs for policies that search or learn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicySettings {
    pub enumerator: EnumeratorConfig,
    pub env: EnvConfig,
    pub dqn: DqnConfig,
    pub autoencoder: AutoencoderConfig,
    pub search: SearchSpace,
    /// Weight-based rollouts feeding the autoencoder corpus.
    pub search_episodes: usize,
}

impl Default for PolicySettings {
    fn default() -> Self {
        PolicySettings {
            enumerator: EnumeratorConfig::default(),
            env: EnvConfig::default(),
            dqn: DqnConfig::default(),
            autoencoder: AutoencoderConfig::default(),
            search: SearchSpace::Joint(vec![4, 8]),
            search_episodes: 50,
        }
    }
}

/// A Q-network together with the encoder it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedAgent {
    pub agent: QAgent,
    pub repr: Representation,
    pub dqn: DqnConfig,
    pub env: EnvConfig,
}

pub fn last_column(s: &Scenario) -> Representation {
    Representation::LastColumn(LastColumn { num_nodes: s.num_nodes() })
}

pub fn train_agent(
    s: &Scenario,
    repr: Representation,
    dqn: &DqnConfig,
    env: EnvConfig,
) -> Result<(TrainedAgent, Vec<CurvePoint>)> {
    let mut task = AoiTask::new(AoiEnv::new(s.clone(), env), repr.clone());
    let (agent, curve) = train_dqn(&mut task, dqn)?;
    Ok((TrainedAgent { agent, repr, dqn: dqn.clone(), env }, curve))
}

pub fn fit_autoencoder(s: &Scenario, settings: &PolicySettings) -> Result<SearchResult> {
    Ok(hyperparameter_search(s, &settings.search, settings.search_episodes, settings.env, &settings.autoencoder)?)
}

pub fn autoencoder_repr(result: &SearchResult) -> AutoencoderRepr {
    AutoencoderRepr::with_cell_size(result.model.clone(), result.k_c)
}

impl TrainedAgent {
    /// Greedy episode from the empty schedule.
    pub fn greedy(&self, s: &Scenario) -> Result<PolicyOutcome> {
        if self.repr.size() != self.agent.net.input_size() {
            bail!("representation size {} does not match the network input {}", self.repr.size(), self.agent.net.input_size());
        }
        let mut task = AoiTask::new(AoiEnv::new(s.clone(), self.env), self.repr.clone());
        if task.env.num_actions() != self.agent.net.output_size() {
            bail!("agent has {} actions, scenario needs {}", self.agent.net.output_size(), task.env.num_actions());
        }
        greedy_rollout(&self.agent, &mut task, self.env.max_steps + 1);
        Ok(PolicyOutcome { policy: task.env.policy().clone(), nwaoi: task.env.objective() })
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::default();
        let kind = match self.repr {
            Representation::LastColumn(_) => "last_column",
            Representation::Autoencoder(_) => "autoencoder",
        };
        let config = json!({
            "dqn": self.dqn,
            "env": self.env,
            "inputs": self.agent.net.input_size(),
            "actions": self.agent.net.output_size(),
            "representation": kind,
        });
        ck.push(Q_SECTION, &self.agent.net.to_params(), config);
        if let Representation::Autoencoder(r) = &self.repr {
            push_autoencoder(&mut ck, r);
        }
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let (params, config) = ck.section(Q_SECTION)?;
        let dqn: DqnConfig = serde_json::from_value(config["dqn"].clone()).context("q_network config")?;
        let env: EnvConfig = serde_json::from_value(config["env"].clone()).context("q_network config")?;
        let inputs = config["inputs"].as_u64().context("q_network inputs")? as usize;
        let actions = config["actions"].as_u64().context("q_network actions")? as usize;
        let mut agent = QAgent::zeros(&dqn, inputs, actions);
        agent.net.load_params(&params).context("q_network parameters")?;
        let repr = match config["representation"].as_str() {
            Some("last_column") => Representation::LastColumn(LastColumn { num_nodes: actions - 1 }),
            Some("autoencoder") => Representation::Autoencoder(autoencoder_from_checkpoint(ck)?),
            other => bail!("unknown representation {other:?}"),
        };
        Ok(TrainedAgent { agent, repr, dqn, env })
    }
}

pub fn push_autoencoder(ck: &mut Checkpoint, r: &AutoencoderRepr) {
    let config = json!({
        "width": r.model.width(),
        "hidden": r.model.hidden(),
        "cell_size": r.model.cell_size,
        "repr_cell_size": r.cell_size,
    });
    ck.push(AE_SECTION, &r.model.to_params(), config);
}

pub fn autoencoder_from_checkpoint(ck: &Checkpoint) -> Result<AutoencoderRepr> {
    let (params, config) = ck.section(AE_SECTION)?;
    let field = |name: &str| config[name].as_u64().map(|v| v as usize).with_context(|| format!("autoencoder {name}"));
    let mut model = LstmAutoencoder::new(field("width")?, field("hidden")?, field("cell_size")?, 0);
    model.load_params(&params).context("autoencoder parameters")?;
    Ok(AutoencoderRepr::with_cell_size(model, field("repr_cell_size")?))
}

/// Runs one policy on one scenario, training from scratch where needed.
pub fn run_policy(kind: PolicyKind, s: &Scenario, seed: u64, settings: &PolicySettings) -> Result<PolicyOutcome> {
    match kind {
        PolicyKind::Enumerate => {
            let e = enumerate_optimal(s, &settings.enumerator)?;
            Ok(PolicyOutcome { policy: e.best.policy.clone(), nwaoi: e.best.objective })
        }
        PolicyKind::Weight => {
            let mut env = AoiEnv::new(s.clone(), settings.env);
            let r = weight_based_rollout(&mut env, seed);
            Ok(PolicyOutcome { policy: r.policy, nwaoi: r.objective })
        }
        PolicyKind::Dqn => {
            let dqn = DqnConfig { seed, ..settings.dqn.clone() };
            train_agent(s, last_column(s), &dqn, settings.env)?.0.greedy(s)
        }
        PolicyKind::DqnLstm => {
            let ae = AutoencoderConfig { seed, ..settings.autoencoder.clone() };
            let search = fit_autoencoder(s, &PolicySettings { autoencoder: ae, ..settings.clone() })?;
            let repr = Representation::Autoencoder(autoencoder_repr(&search));
            let dqn = DqnConfig { seed, ..settings.dqn.clone() };
            train_agent(s, repr, &dqn, settings.env)?.0.greedy(s)
        }
    }
}
