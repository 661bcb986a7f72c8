use std::path::{Path, PathBuf};

use log::info;
use plumeseek_core::report::{line_plot_svg, mean_curve_from_csv, mean_of_curves, thin, Series, PALETTE};
use plumeseek_core::rl::{train as train_agents, TrainResult};
use plumeseek_core::{RunConfig, TrainMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{ensure_writable, numbered_csvs, write, write_json};
use crate::{CliError, CliResult, Common};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRunSummary {
    pub mode: TrainMode,
    pub seed: u64,
    pub steps: u64,
    /// Agent-averaged smoothed reward over the first quarter of training.
    pub first_quartile_mean: f64,
    pub final_quartile_mean: f64,
    /// Per agent, in action-code order.
    pub action_counts: Vec<[u64; 5]>,
}

pub const REWARD_FIGURE_FILE: &str = "reward_curves.svg";

pub fn curves_path(out: &Path, mode: TrainMode, seed: u64) -> PathBuf {
    out.join(mode.as_str()).join(format!("curves_{seed}.csv"))
}

pub fn checkpoint_path(out: &Path, mode: TrainMode, seed: u64, agent: usize) -> PathBuf {
    out.join(mode.as_str()).join(format!("checkpoint_{seed}_agent{agent}.json"))
}

/// Mean of `curve` over the fractional index range [lo, hi).
pub fn window_mean(curve: &[f64], lo: f64, hi: f64) -> f64 {
    let n = curve.len();
    let (a, b) = ((lo * n as f64).floor() as usize, (hi * n as f64).ceil() as usize);
    let part = &curve[a.min(n)..b.min(n)];
    if part.is_empty() {
        return f64::NAN;
    }
    part.iter().sum::<f64>() / part.len() as f64
}

pub fn summarize(r: &TrainResult) -> TrainRunSummary {
    let curve = r.mean_curve();
    TrainRunSummary {
        mode: r.mode,
        seed: r.seed,
        steps: r.steps,
        first_quartile_mean: window_mean(&curve, 0.0, 0.25),
        final_quartile_mean: window_mean(&curve, 0.75, 1.0),
        action_counts: r.action_counts.clone(),
    }
}

/// Overlays the seed-mean reward curve of each mode that has curve files in `out`.
pub fn reward_figure(out: &Path) -> CliResult<Option<String>> {
    let mut series = Vec::new();
    for (k, mode) in TrainMode::ALL.iter().enumerate() {
        let files = numbered_csvs(&out.join(mode.as_str()), "curves_");
        if files.is_empty() {
            continue;
        }
        let mut curves = Vec::new();
        for (_, path) in files {
            let text = std::fs::read_to_string(&path)?;
            curves.push(mean_curve_from_csv(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?);
        }
        let pts = thin(&mean_of_curves(&curves), 2000);
        series.push(Series::new(mode.as_str(), PALETTE[(k + 3) % PALETTE.len()], pts));
    }
    if series.len() < TrainMode::ALL.len() {
        return Ok(None);
    }
    Ok(Some(line_plot_svg("Smoothed reward (agent and seed mean)", "step", "reward", &series)))
}

pub fn train(args: &Common) -> CliResult<Vec<TrainRunSummary>> {
    let cfg: RunConfig = args.resolve()?;
    let tc = cfg.train_config();
    let modes: Vec<TrainMode> = match args.mode {
        Some(m) => vec![m],
        None => TrainMode::ALL.to_vec(),
    };
    let out = cfg.output_dir.clone();
    let mut planned = Vec::new();
    for &m in &modes {
        planned.push(out.join(m.as_str()).join("summary.json"));
        planned.push(out.join(m.as_str()).join("effective_config.json"));
        for &s in &cfg.seeds {
            planned.push(curves_path(&out, m, s));
            planned.extend((0..tc.env.n_agents).map(|i| checkpoint_path(&out, m, s, i)));
        }
    }
    ensure_writable(&planned, args.force)?;

    let jobs: Vec<(TrainMode, u64)> = modes.iter().flat_map(|&m| cfg.seeds.iter().map(move |&s| (m, s))).collect();
    let pool = args.pool()?;
    let results: Vec<TrainResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(mode, seed)| {
                info!("training mode={} seed={seed}", mode.as_str());
                train_agents(&tc, mode, seed).map_err(CliError::from)
            })
            .collect::<CliResult<_>>()
    })?;

    let mut summaries = Vec::new();
    for r in &results {
        let mut csv = Vec::new();
        r.write_curves_csv(&mut csv)?;
        write(&curves_path(&out, r.mode, r.seed), csv)?;
        for (i, net) in r.nets.iter().enumerate() {
            write(&checkpoint_path(&out, r.mode, r.seed, i), net.to_json()? + "\n")?;
        }
        summaries.push(summarize(r));
    }
    for &m in &modes {
        let of_mode: Vec<&TrainRunSummary> = summaries.iter().filter(|s| s.mode == m).collect();
        write_json(&out.join(m.as_str()).join("summary.json"), &of_mode)?;
        write(&out.join(m.as_str()).join("effective_config.json"), cfg.to_json_pretty())?;
    }
    if let Some(svg) = reward_figure(&out)? {
        write(&out.join(REWARD_FIGURE_FILE), svg)?;
    }
    Ok(summaries)
}
