//! Efficiency and behavior metrics over episode logs.

use serde::{Deserialize, Serialize};

use super::EpisodeLog;
use crate::field::Point;

/// First step whose IG reaches `threshold_bits`.
pub fn steps_to_ig(log: &EpisodeLog, threshold_bits: f64) -> Option<usize> {
    first_reaching(&log.ig_series, threshold_bits)
}

pub fn first_reaching(series: &[f64], threshold: f64) -> Option<usize> {
    series.iter().position(|&v| v >= threshold)
}

/// Median with misses counted as `budget + 1`.
pub fn median_steps(values: &[Option<usize>], budget: usize) -> f64 {
    let mut v: Vec<usize> = values.iter().map(|s| s.unwrap_or(budget + 1)).collect();
    v.sort_unstable();
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2]) as f64
    }
}

/// First step at which any agent measured m/σ above `z`.
pub fn detection_step(log: &EpisodeLog, noise_sigma: f64, z: f64) -> Option<usize> {
    log.steps.iter().find(|r| r.m / noise_sigma > z).map(|r| r.step)
}

/// Mean agent-to-source distance over the measurement sites of `steps`.
pub fn mean_distance_to(log: &EpisodeLog, source: Point, steps: std::ops::Range<usize>) -> f64 {
    let rows: Vec<_> = steps.flat_map(|t| log.step_rows(t)).collect();
    if rows.is_empty() {
        return f64::NAN;
    }
    rows.iter().map(|r| Point::new(r.x, r.y).dist(source)).sum::<f64>() / rows.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExploitationShift {
    pub detection_step: usize,
    /// Mean distance over the `window` steps before detection.
    pub before: f64,
    /// Mean distance over the `window` steps after detection.
    pub after: f64,
}

impl ExploitationShift {
    /// Agents closed in on the source after the detection.
    pub fn converged(&self) -> bool {
        self.after < self.before
    }
}

/// Before/after comparison of agent-to-source distance around the first
/// m/σ > `z` detection. `None` when nothing was detected.
pub fn exploitation_shift(log: &EpisodeLog, noise_sigma: f64, z: f64, window: usize) -> Option<ExploitationShift> {
    let d = detection_step(log, noise_sigma, z)?;
    let source = log.summary.true_source;
    let n = log.summary.n_steps;
    Some(ExploitationShift {
        detection_step: d,
        before: mean_distance_to(log, source, d.saturating_sub(window)..d),
        after: mean_distance_to(log, source, (d + 1).min(n)..(d + 1 + window).min(n)),
    })
}
