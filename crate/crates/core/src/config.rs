//! The JSON run configuration shared by every subcommand.
//!
//! Every field has a default; the fully resolved config is written next to
//! the outputs so a run can be repeated from that file alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridSpec, PlumeParams};
use crate::planner::{CostModel, QuadratureSpec, Tier};
use crate::rl::{EnvConfig, RewardWeights, TrainConfig};
use crate::sim::{MotionPolicy, SimConfig, SourcePlacement};

/// Largest exact-tier workload (measurement cells × nodes × source cells)
/// accepted without an explicit override.
pub const EXACT_TIER_BUDGET: u64 = 64 * 64 * 32 * 32 * 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub tier: Tier,
    pub quadrature: QuadratureSpec,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self { tier: Tier::SnrFft, quadrature: QuadratureSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n_agents: usize,
    pub n_steps: usize,
    pub policies: Vec<MotionPolicy>,
    pub source: SourcePlacement,
    /// Information level (bits) used for the steps-to-threshold metric.
    pub ig_threshold_bits: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            n_agents: 5,
            n_steps: 300,
            policies: MotionPolicy::ALL.to_vec(),
            source: SourcePlacement::SampledFromPrior,
            ig_threshold_bits: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlSection {
    pub n_agents: usize,
    pub horizon: usize,
    pub a_max: f64,
    pub damping: f64,
    pub v_max: f64,
    /// Wind normalization; defaults to max(|wind|, 1).
    pub w_max: Option<f64>,
    pub dt: f64,
    pub reward: RewardWeights,
    pub source: SourcePlacement,
    pub episodes: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub target_sync: u64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    pub epsilon_decay_steps: u64,
    pub hidden: Vec<usize>,
    pub smoothing_window: usize,
}

impl Default for RlSection {
    fn default() -> Self {
        let env = EnvConfig::new(GridSpec::uniform(1.0, 1.0, 1, 1), PlumeParams::default(), 3);
        let t = TrainConfig::new(env.clone());
        Self {
            n_agents: env.n_agents,
            horizon: env.horizon,
            a_max: env.a_max,
            damping: env.damping,
            v_max: env.v_max,
            w_max: None,
            dt: env.dt,
            reward: env.reward,
            source: env.source,
            episodes: t.episodes,
            gamma: t.gamma,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            replay_capacity: t.replay_capacity,
            target_sync: t.target_sync,
            epsilon_start: t.epsilon_start,
            epsilon_min: t.epsilon_min,
            epsilon_decay_steps: t.epsilon_decay_steps,
            hidden: t.hidden,
            smoothing_window: t.smoothing_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub plume: PlumeParams,
    pub cost: CostModel,
    pub planner: PlannerSection,
    /// Optional prior weights over the source grid (row-major); uniform when absent.
    pub prior: Option<Vec<f64>>,
    pub sim: SimSection,
    pub rl: RlSection,
    /// Sizes (cells per side) timed by the benchmark subcommand.
    pub bench_sizes: Vec<usize>,
    pub output_dir: PathBuf,
    pub seeds: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::uniform(64.0, 64.0, 64, 64),
            plume: PlumeParams::default(),
            cost: CostModel::default(),
            planner: PlannerSection::default(),
            prior: None,
            sim: SimSection::default(),
            rl: RlSection::default(),
            bench_sizes: vec![8, 16, 32, 64],
            output_dir: PathBuf::from("out"),
            seeds: vec![0],
        }
    }
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.plume.validate()?;
        self.cost.validate()?;
        self.planner.quadrature.validate()?;
        if let Some(w) = &self.prior {
            crate::belief::SourcePosterior::from_weights(&self.grid, w)?;
        }
        if self.sim.policies.is_empty() {
            return Err(Error::config("sim.policies must not be empty"));
        }
        if !(self.sim.ig_threshold_bits >= 0.0 && self.sim.ig_threshold_bits.is_finite()) {
            return Err(Error::config("sim.ig_threshold_bits must be >= 0"));
        }
        self.sim_config(self.sim.policies[0], 0).validate()?;
        self.train_config().validate()?;
        if self.bench_sizes.contains(&0) {
            return Err(Error::config("bench_sizes must be >= 1"));
        }
        Ok(())
    }

    /// Exact-tier work estimate in hypothetical updates × source cells.
    pub fn exact_tier_work(&self) -> u64 {
        self.grid.measurement_len() as u64 * self.planner.quadrature.node_count as u64 * self.grid.source_len() as u64
    }

    /// Refuses oversized exact-tier runs unless `force` is set.
    pub fn check_tier_budget(&self, force: bool) -> Result<()> {
        if self.planner.tier == Tier::Exact && !force && self.exact_tier_work() > EXACT_TIER_BUDGET {
            return Err(Error::config(format!(
                "exact tier on this grid needs {} cell evaluations per agent step (limit {}); use --force to run anyway",
                self.exact_tier_work(),
                EXACT_TIER_BUDGET
            )));
        }
        Ok(())
    }

    pub fn sim_config(&self, policy: MotionPolicy, seed: u64) -> SimConfig {
        SimConfig {
            grid: self.grid,
            plume: self.plume,
            cost: self.cost,
            tier: self.planner.tier,
            quadrature: self.planner.quadrature,
            n_agents: self.sim.n_agents,
            n_steps: self.sim.n_steps,
            policy,
            seed,
            source: self.sim.source,
            prior: self.prior.clone(),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let r = &self.rl;
        let mut env = EnvConfig::new(self.grid, self.plume, r.n_agents);
        env.horizon = r.horizon;
        env.a_max = r.a_max;
        env.damping = r.damping;
        env.v_max = r.v_max;
        if let Some(w) = r.w_max {
            env.w_max = w;
        }
        env.dt = r.dt;
        env.reward = r.reward;
        env.source = r.source;
        env.prior = self.prior.clone();
        TrainConfig {
            env,
            episodes: r.episodes,
            gamma: r.gamma,
            learning_rate: r.learning_rate,
            batch_size: r.batch_size,
            replay_capacity: r.replay_capacity,
            target_sync: r.target_sync,
            epsilon_start: r.epsilon_start,
            epsilon_min: r.epsilon_min,
            epsilon_decay_steps: r.epsilon_decay_steps,
            hidden: r.hidden.clone(),
            smoothing_window: r.smoothing_window,
        }
    }
}
