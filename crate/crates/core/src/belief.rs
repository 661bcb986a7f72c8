//! Grid Bayesian inference over the source location.
//!
//! Beliefs are kept as natural-log probabilities and renormalized with
//! log-sum-exp after every update; information gain is reported in bits.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{concentration, GridSpec, PlumeParams, Point, SourceLocation};

/// Per-record, per-cell log-likelihood floor.
pub const LOG_LIKELIHOOD_FLOOR: f64 = -700.0;

/// One concentration sample d_t = (x_t, y_t, m_t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub x: f64,
    pub y: f64,
    pub m: f64,
    pub t: u64,
    pub agent_id: usize,
}

impl MeasurementRecord {
    pub fn new(loc: Point, m: f64, t: u64, agent_id: usize) -> Self {
        Self { x: loc.x, y: loc.y, m, t, agent_id }
    }

    pub fn loc(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Numerically stable ln Σ exp(v); −∞ entries are skipped.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// ln N(m; f(loc, source), σ²).
pub fn log_likelihood(m: f64, loc: Point, source: SourceLocation, params: &PlumeParams) -> f64 {
    let sigma = params.noise_sigma;
    let z = (m - concentration(loc, source, params)) / sigma;
    -0.5 * z * z - (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourcePosterior {
    grid: GridSpec,
    log_probs: Vec<f64>,
}

impl SourcePosterior {
    pub fn uniform(grid: &GridSpec) -> Self {
        let n = grid.source_len();
        Self {
            grid: *grid,
            log_probs: vec![-(n as f64).ln(); n],
        }
    }

    /// Normalizes nonnegative weights; zero-weight cells get zero probability.
    pub fn from_weights(grid: &GridSpec, weights: &[f64]) -> Result<Self> {
        if weights.len() != grid.source_len() {
            return Err(Error::config(format!(
                "prior has {} weights, source grid has {} cells",
                weights.len(),
                grid.source_len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::config("prior weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::config("prior weights sum to zero"));
        }
        let log_probs = weights.iter().map(|w| (w / total).ln()).collect();
        Ok(Self { grid: *grid, log_probs }.renormalized())
    }

    pub fn point_mass(grid: &GridSpec, cell: usize) -> Self {
        let mut log_probs = vec![f64::NEG_INFINITY; grid.source_len()];
        log_probs[cell] = 0.0;
        Self { grid: *grid, log_probs }
    }

    /// Wraps raw log-weights and normalizes them.
    pub fn from_log_weights(grid: &GridSpec, log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.len() != grid.source_len() {
            return Err(Error::config("log-weight length does not match the source grid"));
        }
        if log_weights.iter().any(|v| v.is_nan()) {
            return Err(Error::config("log-weights contain NaN"));
        }
        let post = Self { grid: *grid, log_probs: log_weights }.renormalized();
        if post.log_probs.iter().all(|v| *v == f64::NEG_INFINITY) {
            return Err(Error::AllMassLost);
        }
        Ok(post)
    }

    fn renormalized(mut self) -> Self {
        let norm = logsumexp(&self.log_probs);
        if norm.is_finite() {
            self.log_probs.iter_mut().for_each(|v| *v -= norm);
        }
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn prob(&self, cell: usize) -> f64 {
        self.log_probs[cell].exp()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|v| v.exp()).collect()
    }

    /// ln Σ p; zero for a normalized belief.
    pub fn log_norm(&self) -> f64 {
        logsumexp(&self.log_probs)
    }

    fn check_same_grid(&self, other: &SourcePosterior) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("beliefs live on different grids".into()));
        }
        Ok(())
    }

    /// Bayes update with a batch of records; the input is left untouched.
    pub fn update(&self, records: &[MeasurementRecord], params: &PlumeParams) -> Result<Self> {
        let ll = RecordLikelihood::compute(&self.grid, records, params, Some(self));
        self.apply(&ll)
    }

    /// Adds a precomputed log-likelihood field and renormalizes.
    pub fn apply(&self, ll: &RecordLikelihood) -> Result<Self> {
        if ll.values.len() != self.log_probs.len() {
            return Err(Error::GridMismatch("likelihood field does not match the belief".into()));
        }
        if ll.all_floored {
            return Err(Error::AllMassLost);
        }
        let log_probs: Vec<f64> = self
            .log_probs
            .iter()
            .zip(&ll.values)
            .map(|(lp, l)| lp + l)
            .collect();
        let norm = logsumexp(&log_probs);
        if !norm.is_finite() {
            return Err(Error::AllMassLost);
        }
        Ok(Self {
            grid: self.grid,
            log_probs: log_probs.into_iter().map(|v| v - norm).collect(),
        })
    }

    /// KL(self ‖ reference) in bits.
    pub fn info_gain_bits(&self, reference: &SourcePosterior) -> Result<f64> {
        self.check_same_grid(reference)?;
        let mut nats = 0.0;
        for (&lp, &lq) in self.log_probs.iter().zip(&reference.log_probs) {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let p = lp.exp();
            if p == 0.0 {
                continue;
            }
            if lq == f64::NEG_INFINITY {
                return Err(Error::UnsupportedReference);
            }
            nats += p * (lp - lq);
        }
        // KL is nonnegative; drop summation noise below zero.
        Ok((nats / std::f64::consts::LN_2).max(0.0))
    }

    /// Information gain (bits, against `reference`) of the belief obtained by
    /// updating with one hypothetical measurement `m`, where `f_cells[s]` is
    /// the mean concentration that hypothesis `s` predicts at the sample site.
    /// Numerically identical to `update` followed by `info_gain_bits`, without
    /// materializing the intermediate belief.
    pub fn info_gain_after(
        &self,
        reference: &SourcePosterior,
        f_cells: &[f64],
        m: f64,
        noise_sigma: f64,
        scratch: &mut Vec<f64>,
    ) -> Result<f64> {
        self.check_same_grid(reference)?;
        let log_norm_const = (noise_sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
        scratch.clear();
        let mut any_above = false;
        for (&lp, &f) in self.log_probs.iter().zip(f_cells) {
            let z = (m - f) / noise_sigma;
            let l = -0.5 * z * z - log_norm_const;
            if l > LOG_LIKELIHOOD_FLOOR {
                any_above |= lp > f64::NEG_INFINITY;
                scratch.push(lp + l);
            } else {
                scratch.push(lp + LOG_LIKELIHOOD_FLOOR);
            }
        }
        if !any_above {
            return Err(Error::AllMassLost);
        }
        let norm = logsumexp(scratch);
        if !norm.is_finite() {
            return Err(Error::AllMassLost);
        }
        let mut nats = 0.0;
        for (&v, &lq) in scratch.iter().zip(&reference.log_probs) {
            let lp = v - norm;
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let p = lp.exp();
            if p == 0.0 {
                continue;
            }
            if lq == f64::NEG_INFINITY {
                return Err(Error::UnsupportedReference);
            }
            nats += p * (lp - lq);
        }
        // KL is nonnegative; drop summation noise below zero.
        Ok((nats / std::f64::consts::LN_2).max(0.0))
    }

    /// Mean concentration every hypothesis predicts at `loc`.
    pub fn predicted_concentrations(&self, loc: Point, params: &PlumeParams) -> Vec<f64> {
        (0..self.len())
            .map(|idx| concentration(loc, self.grid.source_center(idx), params))
            .collect()
    }

    /// Most probable cell; ties go to the lowest row-major index.
    pub fn map_estimate(&self) -> (usize, Point) {
        let mut best = 0;
        for (idx, &lp) in self.log_probs.iter().enumerate() {
            if lp > self.log_probs[best] {
                best = idx;
            }
        }
        (best, self.grid.source_center(best))
    }

    /// Smallest greedy set of cells (descending probability, ties by index)
    /// holding at least `mass` of the belief.
    pub fn hpd_region(&self, mass: f64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.log_probs.len()).collect();
        order.sort_by(|&a, &b| {
            self.log_probs[b]
                .partial_cmp(&self.log_probs[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        // Absorbs summation error so that e.g. 19 cells of 1/20 reach 0.95.
        let target = mass.min(1.0) - 1e-12;
        let mut acc = 0.0;
        let mut region = Vec::new();
        for idx in order {
            region.push(idx);
            acc += self.prob(idx);
            if acc >= target {
                break;
            }
        }
        region
    }

    /// One probability per line, row-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in self.probs() {
            writeln!(out, "{p}")?;
        }
        Ok(())
    }

    pub fn summary(&self, prior: &SourcePosterior) -> Result<PosteriorSummary> {
        let (map_cell, map_xy) = self.map_estimate();
        Ok(PosteriorSummary {
            map_cell,
            map_xy,
            ig_bits: self.info_gain_bits(prior)?,
            hpd95_size: self.hpd_region(0.95).len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub map_cell: usize,
    pub map_xy: Point,
    pub ig_bits: f64,
    pub hpd95_size: usize,
}

/// Summed, floored log-likelihood of a record batch for every source cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordLikelihood {
    pub values: Vec<f64>,
    /// Some record drove every supported cell to the floor.
    pub all_floored: bool,
}

impl RecordLikelihood {
    /// `support` restricts the all-floored check to cells with nonzero belief.
    pub fn compute(
        grid: &GridSpec,
        records: &[MeasurementRecord],
        params: &PlumeParams,
        support: Option<&SourcePosterior>,
    ) -> Self {
        let n = grid.source_len();
        let mut values = vec![0.0; n];
        let mut all_floored = false;
        let centers: Vec<Point> = (0..n).map(|idx| grid.source_center(idx)).collect();
        for rec in records {
            let loc = rec.loc();
            let mut any_above = false;
            for (idx, (v, &src)) in values.iter_mut().zip(&centers).enumerate() {
                let l = log_likelihood(rec.m, loc, src, params);
                let supported = support.map_or(true, |p| p.log_probs[idx] > f64::NEG_INFINITY);
                if l > LOG_LIKELIHOOD_FLOOR {
                    *v += l;
                    any_above |= supported;
                } else {
                    *v += LOG_LIKELIHOOD_FLOOR;
                }
            }
            all_floored |= !any_above;
        }
        Self { values, all_floored }
    }
}

/// Free-function forms of the belief operations.
pub fn posterior_update(
    post: &SourcePosterior,
    records: &[MeasurementRecord],
    params: &PlumeParams,
) -> Result<SourcePosterior> {
    post.update(records, params)
}

pub fn info_gain_bits(post: &SourcePosterior, reference: &SourcePosterior) -> Result<f64> {
    post.info_gain_bits(reference)
}
