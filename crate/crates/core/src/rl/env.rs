use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Action, Observation, RewardTerms, RewardWeights, OBSERVATION_LEN};
use crate::belief::{MeasurementRecord, SourcePosterior};
use crate::error::{Error, Result};
use crate::field::{concentration, GridSpec, PlumeParams, Point};
use crate::rng::{stream, Purpose};
use crate::sim::{AgentState, SourcePlacement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub grid: GridSpec,
    pub plume: PlumeParams,
    pub n_agents: usize,
    /// Steps per episode.
    pub horizon: usize,
    /// Acceleration magnitude of a Move.
    pub a_max: f64,
    /// Velocity damping factor λ applied on every Move.
    pub damping: f64,
    pub v_max: f64,
    /// Wind normalization.
    pub w_max: f64,
    pub dt: f64,
    pub reward: RewardWeights,
    pub source: SourcePlacement,
    pub prior: Option<Vec<f64>>,
}

impl EnvConfig {
    pub fn new(grid: GridSpec, plume: PlumeParams, n_agents: usize) -> Self {
        let w_max = plume.wind.x.hypot(plume.wind.y).max(1.0);
        Self {
            grid,
            plume,
            n_agents,
            horizon: 200,
            a_max: 0.5,
            damping: 0.95,
            v_max: 2.0,
            w_max,
            dt: 1.0,
            reward: RewardWeights::default(),
            source: SourcePlacement::SampledFromPrior,
            prior: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.plume.validate()?;
        self.reward.validate()?;
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if self.n_agents == 0 {
            return Err(Error::config("env: n_agents must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("env: horizon must be >= 1"));
        }
        if !(pos(self.v_max) && pos(self.w_max) && pos(self.dt) && self.a_max.is_finite() && self.a_max >= 0.0) {
            return Err(Error::config("env: a_max >= 0 and v_max, w_max, dt > 0 required"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::config("env: damping must lie in (0, 1]"));
        }
        if self.plume.wind.x.abs() > self.w_max || self.plume.wind.y.abs() > self.w_max {
            return Err(Error::config("env: wind exceeds w_max"));
        }
        if let SourcePlacement::Fixed(p) = self.source {
            if !self.grid.contains(p) {
                return Err(Error::config("env: fixed source outside the world"));
            }
        }
        Ok(())
    }

    pub fn prior(&self) -> Result<SourcePosterior> {
        match &self.prior {
            None => Ok(SourcePosterior::uniform(&self.grid)),
            Some(w) => SourcePosterior::from_weights(&self.grid, w),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observations: Vec<Observation>,
    pub rewards: Vec<f64>,
    pub terms: Vec<RewardTerms>,
    pub done: bool,
}

/// Per-agent bookkeeping that is not part of [`AgentState`].
#[derive(Debug, Clone, PartialEq)]
struct Tracker {
    ig_bits: f64,
    last_m: f64,
    last_record: Option<MeasurementRecord>,
    /// Step of the newest record consumed from each peer.
    consumed: Vec<Option<u64>>,
    moved_since_measure: bool,
    repeat_run: usize,
}

/// Multi-agent environment with discrete high-level actions.
#[derive(Debug, Clone)]
pub struct HybridEnv {
    config: EnvConfig,
    prior: SourcePosterior,
    agents: Vec<AgentState>,
    trackers: Vec<Tracker>,
    noise: Vec<ChaCha8Rng>,
    source: Point,
    t: usize,
    done: bool,
}

impl HybridEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let prior = config.prior()?;
        let mut env = Self {
            prior,
            agents: Vec::new(),
            trackers: Vec::new(),
            noise: Vec::new(),
            source: config.grid.center(),
            t: 0,
            done: true,
            config,
        };
        env.reset(0);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn source(&self) -> Point {
        self.source
    }

    pub fn prior(&self) -> &SourcePosterior {
        &self.prior
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn ig_bits(&self, agent: usize) -> f64 {
        self.trackers[agent].ig_bits
    }

    /// Most recent measurement taken by `agent`.
    pub fn last_measurement(&self, agent: usize) -> Option<MeasurementRecord> {
        self.trackers[agent].last_record
    }

    pub fn reset(&mut self, seed: u64) -> Vec<Observation> {
        let cfg = &self.config;
        let g = &cfg.grid;
        self.source = cfg.source.place(g, &self.prior, &mut stream(seed, Purpose::Placement, 0));
        let n = cfg.n_agents;
        self.agents = (0..n)
            .map(|id| {
                let mut rng = stream(seed, Purpose::InitialPosition, id as u64);
                let p = Point::new(
                    g.x_min + rng.random::<f64>() * g.width(),
                    g.y_min + rng.random::<f64>() * g.height(),
                );
                AgentState::new(id, g.clamp(p), self.prior.clone())
            })
            .collect();
        self.trackers = (0..n)
            .map(|_| Tracker {
                ig_bits: 0.0,
                last_m: 0.0,
                last_record: None,
                consumed: vec![None; n],
                moved_since_measure: false,
                repeat_run: 0,
            })
            .collect();
        self.noise = (0..n).map(|id| stream(seed, Purpose::Noise, id as u64)).collect();
        self.t = 0;
        self.done = false;
        self.observations()
    }

    pub fn observations(&self) -> Vec<Observation> {
        (0..self.agents.len()).map(|i| self.observe(i)).collect()
    }

    fn observe(&self, i: usize) -> Observation {
        let cfg = &self.config;
        let g = &cfg.grid;
        let a = &self.agents[i];
        let tr = &self.trackers[i];
        let nx = |x: f64| ((x - g.x_min) / g.width()).clamp(0.0, 1.0);
        let ny = |y: f64| ((y - g.y_min) / g.height()).clamp(0.0, 1.0);
        let sym = |v: f64, s: f64| (v / s).clamp(-1.0, 1.0);
        let (_, est) = a.belief.map_estimate();
        let max_bits = (self.prior.len() as f64).log2();
        let ig = if max_bits > 0.0 { (tr.ig_bits / max_bits).clamp(0.0, 1.0) } else { 0.0 };
        let mut v = [0.0; OBSERVATION_LEN];
        v[0] = nx(a.position.x);
        v[1] = ny(a.position.y);
        v[2] = sym(a.velocity.x, cfg.v_max);
        v[3] = sym(a.velocity.y, cfg.v_max);
        v[4] = sym(cfg.plume.wind.x, cfg.w_max);
        v[5] = sym(cfg.plume.wind.y, cfg.w_max);
        v[6] = (tr.last_m / cfg.plume.strength).clamp(0.0, 1.0);
        v[7] = nx(est.x);
        v[8] = ny(est.y);
        v[9] = ig;
        v[10] = f64::from(u8::from(tr.moved_since_measure));
        v[11] = f64::from(u8::from(tr.repeat_run > 4));
        if let Some(last) = a.last_action {
            v[12 + last.index()] = 1.0;
        }
        Observation(v)
    }

    fn estimate_error(&self, i: usize) -> f64 {
        self.agents[i].belief.map_estimate().1.dist(self.source)
    }

    /// Applies one action per agent, in id order.
    pub fn step(&mut self, actions: &[Action]) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        if actions.len() != self.agents.len() {
            return Err(Error::config(format!(
                "expected {} actions, got {}",
                self.agents.len(),
                actions.len()
            )));
        }
        let diag = self.config.grid.diagonal();
        let mut terms = Vec::with_capacity(actions.len());
        for (i, &action) in actions.iter().enumerate() {
            let before = self.trackers[i].ig_bits;
            match action {
                Action::DoNothing => {}
                Action::Move => self.apply_move(i),
                Action::Measure => self.apply_measure(i),
                Action::Update => {
                    let buffered = std::mem::take(&mut self.agents[i].concentration_buffer);
                    self.absorb(i, &buffered)?;
                }
                Action::Communicate => {
                    let fresh = self.fresh_peer_records(i);
                    self.absorb(i, &fresh)?;
                }
            }
            let tr = &mut self.trackers[i];
            let agent = &mut self.agents[i];
            tr.repeat_run = if agent.last_action == Some(action) { tr.repeat_run + 1 } else { 1 };
            agent.last_action = Some(action);
            let delta = tr.ig_bits - before;
            terms.push(self.config.reward.terms(delta, self.estimate_error(i), diag, action));
        }
        self.t += 1;
        self.done = self.t >= self.config.horizon;
        Ok(StepOutcome {
            observations: self.observations(),
            rewards: terms.iter().map(RewardTerms::total).collect(),
            terms,
            done: self.done,
        })
    }

    /// Semi-implicit Euler step toward the agent's MAP estimate.
    fn apply_move(&mut self, i: usize) {
        let cfg = &self.config;
        let g = &cfg.grid;
        let agent = &mut self.agents[i];
        let (_, target) = agent.belief.map_estimate();
        let (dx, dy) = (target.x - agent.position.x, target.y - agent.position.y);
        let dist = dx.hypot(dy);
        let (ax, ay) = if dist > 0.0 { (cfg.a_max * dx / dist, cfg.a_max * dy / dist) } else { (0.0, 0.0) };
        let mut vx = cfg.damping * (agent.velocity.x + ax * cfg.dt);
        let mut vy = cfg.damping * (agent.velocity.y + ay * cfg.dt);
        let speed = vx.hypot(vy);
        if speed > cfg.v_max {
            vx *= cfg.v_max / speed;
            vy *= cfg.v_max / speed;
        }
        let mut x = agent.position.x + vx * cfg.dt;
        let mut y = agent.position.y + vy * cfg.dt;
        if x < g.x_min || x > g.x_max {
            x = x.clamp(g.x_min, g.x_max);
            vx = 0.0;
        }
        if y < g.y_min || y > g.y_max {
            y = y.clamp(g.y_min, g.y_max);
            vy = 0.0;
        }
        agent.position = Point::new(x, y);
        agent.velocity = Point::new(vx, vy);
        self.trackers[i].moved_since_measure = true;
    }

    fn apply_measure(&mut self, i: usize) {
        let pos = self.agents[i].position;
        let z: f64 = self.noise[i].sample(StandardNormal);
        let m = concentration(pos, self.source, &self.config.plume) + self.config.plume.noise_sigma * z;
        let rec = MeasurementRecord::new(pos, m, self.t as u64, i);
        self.agents[i].buffer_measurement(rec);
        let tr = &mut self.trackers[i];
        tr.last_m = m;
        tr.last_record = Some(rec);
        tr.moved_since_measure = false;
    }

    /// Each peer's newest measurement, if not consumed by agent `i` before.
    fn fresh_peer_records(&mut self, i: usize) -> Vec<MeasurementRecord> {
        let mut out = Vec::new();
        for peer in 0..self.agents.len() {
            if peer == i {
                continue;
            }
            if let Some(rec) = self.trackers[peer].last_record {
                if self.trackers[i].consumed[peer] != Some(rec.t) {
                    self.trackers[i].consumed[peer] = Some(rec.t);
                    out.push(rec);
                }
            }
        }
        out
    }

    fn absorb(&mut self, i: usize, records: &[MeasurementRecord]) -> Result<()> {
        if records.is_empty() {
            return Ok(());
        }
        let post = self.agents[i].belief.update(records, &self.config.plume)?;
        self.trackers[i].ig_bits = post.info_gain_bits(&self.prior)?;
        self.agents[i].belief = post;
        Ok(())
    }
}
