use std::path::{Path, PathBuf};

use log::info;
use plumeseek_core::report::{line_plot_svg, Series, PALETTE};
use plumeseek_core::sim::{median_steps, steps_to_ig, EpisodeSummary};
use plumeseek_core::{run_episode, EpisodeLog, MotionPolicy, RunConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{ensure_writable, write, write_json};
use crate::{CliError, CliResult, Common};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps_to_ig: Option<usize>,
    pub final_ig_bits: f64,
    pub episode: EpisodeSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: MotionPolicy,
    /// Misses count as `n_steps + 1`.
    pub median_steps_to_ig: f64,
    pub reached: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub ig_threshold_bits: f64,
    pub n_steps: usize,
    pub policies: Vec<PolicySummary>,
    pub runs: Vec<RunSummary>,
}

pub fn episode_path(out: &Path, policy: MotionPolicy, seed: u64) -> PathBuf {
    out.join(policy.as_str()).join(format!("episode_{seed}.csv"))
}

pub const SUMMARY_FILE: &str = "summary.json";
pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.json";
pub const IG_FIGURE_FILE: &str = "ig_curves.svg";

/// Runs every (policy, seed) episode; returns the logs in that order.
pub fn run_all(cfg: &RunConfig, pool: &rayon::ThreadPool) -> CliResult<Vec<EpisodeLog>> {
    let jobs: Vec<(MotionPolicy, u64)> = cfg
        .sim
        .policies
        .iter()
        .flat_map(|&p| cfg.seeds.iter().map(move |&s| (p, s)))
        .collect();
    pool.install(|| {
        jobs.par_iter()
            .map(|&(policy, seed)| {
                info!("episode policy={} seed={seed}", policy.as_str());
                run_episode(&cfg.sim_config(policy, seed)).map_err(CliError::from)
            })
            .collect()
    })
}

pub fn summarize(cfg: &RunConfig, logs: &[EpisodeLog]) -> SimulateSummary {
    let thr = cfg.sim.ig_threshold_bits;
    let runs: Vec<RunSummary> = logs
        .iter()
        .map(|log| RunSummary {
            steps_to_ig: steps_to_ig(log, thr),
            final_ig_bits: log.ig_series.last().copied().unwrap_or(0.0),
            episode: log.summary.clone(),
        })
        .collect();
    let policies = cfg
        .sim
        .policies
        .iter()
        .map(|&p| {
            let steps: Vec<Option<usize>> = runs.iter().filter(|r| r.episode.policy == p).map(|r| r.steps_to_ig).collect();
            PolicySummary {
                policy: p,
                median_steps_to_ig: median_steps(&steps, cfg.sim.n_steps),
                reached: steps.iter().filter(|s| s.is_some()).count(),
                runs: steps.len(),
            }
        })
        .collect();
    SimulateSummary { ig_threshold_bits: thr, n_steps: cfg.sim.n_steps, policies, runs }
}

/// Seed-averaged IG curve per policy.
pub fn ig_figure(curves: &[(MotionPolicy, Vec<Vec<f64>>)]) -> String {
    let series: Vec<Series> = curves
        .iter()
        .enumerate()
        .map(|(k, (policy, per_seed))| {
            let len = per_seed.iter().map(Vec::len).min().unwrap_or(0);
            let pts = (0..len)
                .map(|t| (t as f64, per_seed.iter().map(|s| s[t]).sum::<f64>() / per_seed.len() as f64))
                .collect();
            Series::new(policy.as_str(), PALETTE[k % PALETTE.len()], pts)
        })
        .collect();
    line_plot_svg("Information gain (seed mean)", "step", "IG (bits)", &series)
}

pub fn simulate(args: &Common) -> CliResult<SimulateSummary> {
    let cfg = args.resolve()?;
    cfg.check_tier_budget(args.force)?;
    let out = cfg.output_dir.clone();
    let mut planned: Vec<PathBuf> = cfg
        .sim
        .policies
        .iter()
        .flat_map(|&p| cfg.seeds.iter().map(move |&s| (p, s)))
        .map(|(p, s)| episode_path(&out, p, s))
        .collect();
    planned.extend([SUMMARY_FILE, EFFECTIVE_CONFIG_FILE, IG_FIGURE_FILE].map(|f| out.join(f)));
    ensure_writable(&planned, args.force)?;

    let pool = args.pool()?;
    let logs = run_all(&cfg, &pool)?;
    for log in &logs {
        let path = episode_path(&out, log.summary.policy, log.summary.seed);
        write(&path, log.csv_string())?;
    }
    let summary = summarize(&cfg, &logs);
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    write(&out.join(EFFECTIVE_CONFIG_FILE), cfg.to_json_pretty())?;
    let curves: Vec<(MotionPolicy, Vec<Vec<f64>>)> = cfg
        .sim
        .policies
        .iter()
        .map(|&p| {
            let per_seed = logs.iter().filter(|l| l.summary.policy == p).map(|l| l.ig_series.clone()).collect();
            (p, per_seed)
        })
        .collect();
    write(&out.join(IG_FIGURE_FILE), ig_figure(&curves))?;
    for p in &summary.policies {
        info!(
            "{}: median steps to {} bits = {} ({} of {} reached)",
            p.policy.as_str(),
            summary.ig_threshold_bits,
            p.median_steps_to_ig,
            p.reached,
            p.runs
        );
    }
    Ok(summary)
}
