use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{cost_only_policy, random_policy, AgentState, MotionPolicy, SimConfig};
use crate::belief::{MeasurementRecord, PosteriorSummary, RecordLikelihood, SourcePosterior};
use crate::error::Result;
use crate::field::{concentration, GridSpec, PlumeParams, Point};
use crate::planner::{movement_cost, select_next_cell, Planner, Tier};
use crate::rng::{stream, Purpose};

/// One agent's row for one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub agent_id: usize,
    /// Where the measurement was taken.
    pub x: f64,
    pub y: f64,
    pub m: f64,
    /// Shared information gain after this step's update.
    pub ig_bits: f64,
    /// Site chosen for the next measurement.
    pub next_x: f64,
    pub next_y: f64,
    /// Movement cost paid to get there.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub policy: MotionPolicy,
    pub tier: Tier,
    pub n_agents: usize,
    pub n_steps: usize,
    pub true_source: Point,
    pub final_posterior: PosteriorSummary,
    pub max_ig_bits: f64,
    pub cumulative_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub summary: EpisodeSummary,
    /// Row-major by (step, agent_id).
    pub steps: Vec<StepRecord>,
    /// Shared IG (bits) after each step.
    pub ig_series: Vec<f64>,
}

pub const EPISODE_CSV_HEADER: &str = "step,agent_id,x,y,m,ig_bits,cost";

impl EpisodeLog {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{EPISODE_CSV_HEADER}")?;
        for r in &self.steps {
            writeln!(out, "{},{},{},{},{},{},{}", r.step, r.agent_id, r.x, r.y, r.m, r.ig_bits, r.cost)?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Records of a single step, in agent-id order.
    pub fn step_rows(&self, step: usize) -> &[StepRecord] {
        let n = self.summary.n_agents;
        &self.steps[step * n..(step + 1) * n]
    }

    pub fn measurements(&self, step: usize) -> Vec<MeasurementRecord> {
        self.step_rows(step)
            .iter()
            .map(|r| MeasurementRecord::new(Point::new(r.x, r.y), r.m, r.step as u64, r.agent_id))
            .collect()
    }
}

/// Recomputes the IG series from logged measurements alone.
pub fn replay_ig_series(log: &EpisodeLog, params: &PlumeParams, prior: &SourcePosterior) -> Result<Vec<f64>> {
    let mut belief = prior.clone();
    (0..log.summary.n_steps)
        .map(|t| {
            belief = belief.update(&log.measurements(t), params)?;
            belief.info_gain_bits(prior)
        })
        .collect()
}

pub fn run_episode(config: &SimConfig) -> Result<EpisodeLog> {
    run_episode_observed(config, |_, _| {})
}

/// Like [`run_episode`], calling `observe(step, agents)` after each step's
/// belief update.
pub fn run_episode_observed(
    config: &SimConfig,
    mut observe: impl FnMut(usize, &[AgentState]),
) -> Result<EpisodeLog> {
    config.validate()?;
    let grid: GridSpec = config.grid;
    let params = config.plume;
    let prior = config.prior()?;
    let planner = match config.policy {
        MotionPolicy::Info => Some(Planner::new(config.tier, &params, &grid, config.quadrature)?),
        _ => None,
    };

    let source = config.source.place(&grid, &prior, &mut stream(config.seed, Purpose::Placement, 0));
    let mut agents: Vec<AgentState> = (0..config.n_agents)
        .map(|id| {
            let cell = stream(config.seed, Purpose::InitialPosition, id as u64).random_range(0..grid.measurement_len());
            AgentState::new(id, grid.measurement_center(cell), prior.clone())
        })
        .collect();
    let mut noise: Vec<_> = (0..config.n_agents)
        .map(|id| stream(config.seed, Purpose::Noise, id as u64))
        .collect();
    let mut motion: Vec<_> = (0..config.n_agents)
        .map(|id| stream(config.seed, Purpose::Motion, id as u64))
        .collect();

    let mut steps = Vec::with_capacity(config.n_steps * config.n_agents);
    let mut ig_series = Vec::with_capacity(config.n_steps);
    let mut cumulative_cost = 0.0;

    for t in 0..config.n_steps {
        // Measure, in agent-id order.
        let records: Vec<MeasurementRecord> = agents
            .iter_mut()
            .zip(&mut noise)
            .map(|(agent, rng)| {
                let z: f64 = rng.sample(StandardNormal);
                let m = concentration(agent.position, source, &params) + params.noise_sigma * z;
                let rec = MeasurementRecord::new(agent.position, m, t as u64, agent.id);
                agent.buffer_measurement(rec);
                rec
            })
            .collect();

        // Broadcast and update: every agent folds in every record.
        let ll = RecordLikelihood::compute(&grid, &records, &params, Some(&agents[0].belief));
        for agent in agents.iter_mut() {
            agent.belief = agent.belief.apply(&ll)?;
        }
        let ig = agents[0].belief.info_gain_bits(&prior)?;
        ig_series.push(ig);
        observe(t, &agents);

        // Plan and move.
        let scores = match &planner {
            Some(p) => Some(p.score_map(&agents[0].belief, &prior)?),
            None => None,
        };
        for (agent, rng) in agents.iter_mut().zip(&mut motion) {
            let next = match config.policy {
                MotionPolicy::Info => {
                    let map = scores.as_ref().expect("info policy always scores");
                    grid.measurement_center(select_next_cell(map, &grid, &config.cost, agent.position))
                }
                MotionPolicy::CostOnly => cost_only_policy(agent, &grid, &config.cost, rng),
                MotionPolicy::Random => random_policy(agent, &grid, rng),
            };
            let cost = movement_cost(agent.position, next, &config.cost);
            cumulative_cost += cost;
            steps.push(StepRecord {
                step: t,
                agent_id: agent.id,
                x: agent.position.x,
                y: agent.position.y,
                m: records[agent.id].m,
                ig_bits: ig,
                next_x: next.x,
                next_y: next.y,
                cost,
            });
            agent.position = next;
        }
    }

    let summary = EpisodeSummary {
        seed: config.seed,
        policy: config.policy,
        tier: config.tier,
        n_agents: config.n_agents,
        n_steps: config.n_steps,
        true_source: source,
        final_posterior: agents[0].belief.summary(&prior)?,
        max_ig_bits: (grid.source_len() as f64).log2(),
        cumulative_cost,
    };
    Ok(EpisodeLog { summary, steps, ig_series })
}
