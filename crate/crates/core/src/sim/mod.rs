//! The multi-agent exploration loop: every step each agent measures, the
//! measurements are broadcast, every belief is updated, and each agent picks
//! its next measurement site.

mod episode;
mod metrics;
mod policy;

use serde::{Deserialize, Serialize};

pub use episode::{replay_ig_series, run_episode, run_episode_observed, EpisodeLog, EpisodeSummary, StepRecord};
pub use metrics::{detection_step, exploitation_shift, mean_distance_to, median_steps, steps_to_ig, ExploitationShift};
pub use policy::{cost_only_policy, random_policy};

use crate::belief::{MeasurementRecord, SourcePosterior};
use crate::error::{Error, Result};
use crate::field::{GridSpec, PlumeParams, Point};
use crate::planner::{CostModel, QuadratureSpec, Tier};

/// Per-agent measurement buffer capacity.
pub const BUFFER_CAPACITY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotionPolicy {
    /// Expected information per unit cost.
    Info,
    /// Random cells weighted by inverse movement cost.
    CostOnly,
    /// Uniformly random cells.
    Random,
}

impl MotionPolicy {
    pub const ALL: [MotionPolicy; 3] = [MotionPolicy::Info, MotionPolicy::CostOnly, MotionPolicy::Random];

    pub fn as_str(&self) -> &'static str {
        match self {
            MotionPolicy::Info => "info",
            MotionPolicy::CostOnly => "cost-only",
            MotionPolicy::Random => "random",
        }
    }
}

impl std::str::FromStr for MotionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "info" => Ok(MotionPolicy::Info),
            "cost-only" => Ok(MotionPolicy::CostOnly),
            "random" => Ok(MotionPolicy::Random),
            other => Err(Error::config(format!("unknown motion policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourcePlacement {
    Fixed(Point),
    SampledFromPrior,
}

impl SourcePlacement {
    /// Draws the true source: a fixed point, or the center of a cell drawn from the prior.
    pub fn place<R: rand::Rng>(&self, grid: &GridSpec, prior: &SourcePosterior, rng: &mut R) -> Point {
        match *self {
            SourcePlacement::Fixed(p) => p,
            SourcePlacement::SampledFromPrior => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = prior.len() - 1;
                for (idx, lp) in prior.log_probs().iter().enumerate() {
                    acc += lp.exp();
                    if u < acc {
                        chosen = idx;
                        break;
                    }
                }
                grid.source_center(chosen)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub plume: PlumeParams,
    pub cost: CostModel,
    pub tier: Tier,
    pub quadrature: QuadratureSpec,
    pub n_agents: usize,
    pub n_steps: usize,
    pub policy: MotionPolicy,
    pub seed: u64,
    pub source: SourcePlacement,
    /// Optional prior weights over the source grid; uniform when absent.
    pub prior: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.plume.validate()?;
        self.cost.validate()?;
        self.quadrature.validate()?;
        if self.n_agents == 0 {
            return Err(Error::config("n_agents must be >= 1"));
        }
        if self.n_steps == 0 {
            return Err(Error::config("n_steps must be >= 1"));
        }
        if let SourcePlacement::Fixed(p) = self.source {
            if !self.grid.contains(p) {
                return Err(Error::config(format!("fixed source ({}, {}) lies outside the world", p.x, p.y)));
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

/// Kinematic state, belief, and bounded measurement buffer of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub position: Point,
    pub velocity: Point,
    pub belief: SourcePosterior,
    pub concentration_buffer: Vec<MeasurementRecord>,
    pub last_action: Option<crate::rl::Action>,
}

impl AgentState {
    pub fn new(id: usize, position: Point, belief: SourcePosterior) -> Self {
        Self {
            id,
            position,
            velocity: Point::default(),
            belief,
            concentration_buffer: Vec::with_capacity(BUFFER_CAPACITY),
            last_action: None,
        }
    }

    /// Appends a record, dropping the oldest beyond capacity.
    pub fn buffer_measurement(&mut self, rec: MeasurementRecord) {
        if self.concentration_buffer.len() == BUFFER_CAPACITY {
            self.concentration_buffer.remove(0);
        }
        self.concentration_buffer.push(rec);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buffer_is_bounded() {
        let g = GridSpec::uniform(2.0, 2.0, 2, 2);
        let mut a = AgentState::new(0, Point::new(1.0, 1.0), SourcePosterior::uniform(&g));
        for t in 0..7 {
            a.buffer_measurement(MeasurementRecord::new(a.position, t as f64, t, 0));
        }
        assert_eq!(a.concentration_buffer.len(), BUFFER_CAPACITY);
        assert_eq!(a.concentration_buffer[0].t, 3);
        assert_eq!(a.concentration_buffer[3].t, 6);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in MotionPolicy::ALL {
            assert_eq!(p.as_str().parse::<MotionPolicy>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.as_str()));
        }
    }

    #[test]
    fn placement_serde_shape() {
        let fixed = SourcePlacement::Fixed(Point::new(1.5, 2.5));
        assert_eq!(serde_json::to_string(&fixed).unwrap(), r#"{"fixed":{"x":1.5,"y":2.5}}"#);
        let sampled: SourcePlacement = serde_json::from_str("\"sampled-from-prior\"").unwrap();
        assert_eq!(sampled, SourcePlacement::SampledFromPrior);
    }
}
