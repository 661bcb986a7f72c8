use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{td_train_step_masked, Action, ActionMask, EnvConfig, HybridEnv, QNet, ReplayBuffer, Transition, OBSERVATION_LEN};
use crate::error::{Error, Result};
use crate::rng::{mix, stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    /// Communicate is unavailable.
    Individual,
    Communicating,
}

impl TrainMode {
    pub const ALL: [TrainMode; 2] = [TrainMode::Individual, TrainMode::Communicating];

    pub fn as_str(&self) -> &'static str {
        match self {
            TrainMode::Individual => "individual",
            TrainMode::Communicating => "communicating",
        }
    }

    pub fn mask(&self) -> ActionMask {
        match self {
            TrainMode::Individual => ActionMask::NO_COMMUNICATE,
            TrainMode::Communicating => ActionMask::ALL,
        }
    }
}

impl std::str::FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "individual" => Ok(TrainMode::Individual),
            "communicating" => Ok(TrainMode::Communicating),
            other => Err(Error::config(format!("unknown training mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub env: EnvConfig,
    pub episodes: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Global steps between target-network syncs.
    pub target_sync: u64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    pub epsilon_decay_steps: u64,
    pub hidden: Vec<usize>,
    /// Trailing window of the reward smoothing.
    pub smoothing_window: usize,
}

impl TrainConfig {
    pub fn new(env: EnvConfig) -> Self {
        Self {
            env,
            episodes: 100,
            gamma: 0.95,
            learning_rate: 1e-3,
            batch_size: 32,
            replay_capacity: 10_000,
            target_sync: 500,
            epsilon_start: 1.0,
            epsilon_min: 0.05,
            epsilon_decay_steps: 10_000,
            hidden: vec![64, 64],
            smoothing_window: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        let bad = |msg: &str| Err(Error::config(format!("train: {msg}")));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return bad("need 1 <= batch_size <= replay_capacity");
        }
        if self.target_sync == 0 || self.smoothing_window == 0 {
            return bad("target_sync and smoothing_window must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.epsilon_min) || !(self.epsilon_min..=1.0).contains(&self.epsilon_start) {
            return bad("need 0 <= epsilon_min <= epsilon_start <= 1");
        }
        if self.hidden.contains(&0) {
            return bad("hidden layer widths must be >= 1");
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![OBSERVATION_LEN];
        s.extend(&self.hidden);
        s.push(Action::COUNT);
        s
    }

    pub fn epsilon_at(&self, t: u64) -> f64 {
        linear_epsilon(t, self.epsilon_start, self.epsilon_min, self.epsilon_decay_steps)
    }
}

fn linear_epsilon(t: u64, start: f64, min: f64, decay: u64) -> f64 {
    if t >= decay {
        return min;
    }
    start + (min - start) * t as f64 / decay as f64
}

/// Default schedule: 1.0 falling linearly to 0.05 over 10⁴ steps.
pub fn epsilon(t: u64) -> f64 {
    linear_epsilon(t, 1.0, 0.05, 10_000)
}

/// Mean over a trailing window (shorter at the start).
pub fn smooth_trailing(values: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        acc += v;
        if k >= window {
            acc -= values[k - window];
        }
        out.push(acc / (k + 1).min(window) as f64);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: u64,
    pub agent_id: usize,
    pub smoothed_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub mode: TrainMode,
    pub seed: u64,
    /// Raw per-step reward of each agent.
    pub rewards: Vec<Vec<f64>>,
    /// Ordered by (step, agent_id).
    pub curves: Vec<CurvePoint>,
    /// How often each action appears in each agent's logged transitions.
    pub action_counts: Vec<[u64; Action::COUNT]>,
    pub losses: Vec<Vec<f64>>,
    pub nets: Vec<QNet>,
    pub steps: u64,
}

impl TrainResult {
    /// Smoothed reward averaged over agents, per global step.
    pub fn mean_curve(&self) -> Vec<f64> {
        let n = self.rewards.len();
        let steps = self.steps as usize;
        let mut mean = vec![0.0; steps];
        for p in &self.curves {
            mean[p.step as usize] += p.smoothed_reward / n as f64;
        }
        mean
    }

    pub fn write_curves_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,agent_id,smoothed_reward")?;
        for p in &self.curves {
            writeln!(out, "{},{},{}", p.step, p.agent_id, p.smoothed_reward)?;
        }
        Ok(())
    }
}

/// Episodic DQN training, one independent network per agent.
pub fn train(config: &TrainConfig, mode: TrainMode, seed: u64) -> Result<TrainResult> {
    config.validate()?;
    let n = config.env.n_agents;
    let mask = mode.mask();
    let sizes = config.layer_sizes();
    let mut env = HybridEnv::new(config.env.clone())?;
    let mut nets: Vec<QNet> = (0..n)
        .map(|i| QNet::new(&sizes, &mut stream(seed, Purpose::NetInit, i as u64)))
        .collect();
    let mut targets = nets.clone();
    let mut replays: Vec<ReplayBuffer> = (0..n).map(|_| ReplayBuffer::new(config.replay_capacity)).collect();
    let mut explore: Vec<_> = (0..n).map(|i| stream(seed, Purpose::Explore, i as u64)).collect();
    let mut sample: Vec<_> = (0..n).map(|i| stream(seed, Purpose::Replay, i as u64)).collect();
    let mut rewards = vec![Vec::new(); n];
    let mut losses = vec![Vec::new(); n];
    let mut counts = vec![[0u64; Action::COUNT]; n];
    let mut global: u64 = 0;

    for episode in 0..config.episodes {
        let mut obs = env.reset(mix(seed, episode as u64));
        loop {
            let eps = config.epsilon_at(global);
            let actions: Vec<Action> = (0..n)
                .map(|i| {
                    let rng = &mut explore[i];
                    if rng.random::<f64>() < eps {
                        mask.remap(Action::from_index(rng.random_range(0..Action::COUNT)))
                    } else {
                        nets[i].greedy(obs[i].as_slice(), mask)
                    }
                })
                .collect();
            let out = env.step(&actions)?;
            for i in 0..n {
                let tr = Transition {
                    obs: obs[i],
                    action: actions[i],
                    reward: out.rewards[i],
                    next_obs: out.observations[i],
                    done: out.done,
                };
                counts[i][tr.action.index()] += 1;
                rewards[i].push(tr.reward);
                replays[i].push(tr);
                if let Some(batch) = replays[i].sample(config.batch_size, &mut sample[i]) {
                    let loss = td_train_step_masked(&mut nets[i], &targets[i], &batch, config.gamma, config.learning_rate, mask);
                    losses[i].push(loss);
                }
            }
            global += 1;
            if global % config.target_sync == 0 {
                targets.clone_from(&nets);
            }
            obs = out.observations;
            if out.done {
                break;
            }
        }
    }

    let smoothed: Vec<Vec<f64>> = rewards.iter().map(|r| smooth_trailing(r, config.smoothing_window)).collect();
    let curves = (0..global as usize)
        .flat_map(|t| {
            let smoothed = &smoothed;
            (0..n).map(move |i| CurvePoint { step: t as u64, agent_id: i, smoothed_reward: smoothed[i][t] })
        })
        .collect();
    for net in &nets {
        if !net.is_finite() {
            return Err(Error::config("training diverged: non-finite network parameters"));
        }
    }
    Ok(TrainResult { mode, seed, rewards, curves, action_counts: counts, losses, nets, steps: global })
}
