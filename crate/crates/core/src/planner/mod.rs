//! Candidate scoring by expected information per unit movement cost.

mod exact;
mod quadrature;
mod snr;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use exact::{eig_at_expected_measurement, eig_exact, expected_measurement};
pub use quadrature::{gauss_hermite, QuadratureRule, QuadratureSpec};
pub use snr::{snr_score_bruteforce, snr_score_map_bruteforce, snr_score_map_fft, SnrConvolver};

use crate::belief::SourcePosterior;
use crate::error::{Error, Result};
use crate::field::{GridSpec, PlumeParams, Point};

/// C(from → to) = overhead + quad_coeff·‖to − from‖².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub overhead: f64,
    pub quad_coeff: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { overhead: 1.0, quad_coeff: 0.01 }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.overhead > 0.0 && self.overhead.is_finite()) {
            return Err(Error::config("cost overhead must be > 0"));
        }
        if !(self.quad_coeff >= 0.0 && self.quad_coeff.is_finite()) {
            return Err(Error::config("cost quad_coeff must be >= 0"));
        }
        Ok(())
    }
}

pub fn movement_cost(from: Point, to: Point, cm: &CostModel) -> f64 {
    cm.overhead + cm.quad_coeff * from.dist2(to)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    Exact,
    ExpectedMeasurement,
    SnrFft,
}

impl Tier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tier::Exact => "exact",
            Tier::ExpectedMeasurement => "expected-measurement",
            Tier::SnrFft => "snr-fft",
        }
    }
}

impl std::str::FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Tier::Exact),
            "expected-measurement" => Ok(Tier::ExpectedMeasurement),
            "snr-fft" => Ok(Tier::SnrFft),
            other => Err(Error::config(format!("unknown planner tier '{other}'"))),
        }
    }
}

/// Per-candidate scores over the A×B measurement grid (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    pub values: Vec<f64>,
    pub width: usize,
    pub height: usize,
    pub tier: Tier,
}

impl ScoreMap {
    pub fn new(grid: &GridSpec, values: Vec<f64>, tier: Tier) -> Self {
        debug_assert_eq!(values.len(), grid.measurement_len());
        Self { values, width: grid.a_cells, height: grid.b_cells, tier }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Header `x_cell,y_cell,score`, one row per candidate.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x_cell,y_cell,score")?;
        for (idx, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{},{}", idx % self.width, idx / self.width, v)?;
        }
        Ok(())
    }
}

/// Cell maximizing score / movement cost from `agent_pos`; ties resolve to
/// the lowest row-major index.
pub fn select_next_cell(scores: &ScoreMap, grid: &GridSpec, cm: &CostModel, agent_pos: Point) -> usize {
    let mut best = 0;
    let mut best_ratio = f64::NEG_INFINITY;
    for (idx, &s) in scores.values.iter().enumerate() {
        let ratio = s / movement_cost(agent_pos, grid.measurement_center(idx), cm);
        if ratio > best_ratio {
            best = idx;
            best_ratio = ratio;
        }
    }
    best
}

pub fn select_next(scores: &ScoreMap, grid: &GridSpec, cm: &CostModel, agent_pos: Point) -> Point {
    grid.measurement_center(select_next_cell(scores, grid, cm, agent_pos))
}

/// Scores candidates at a configured fidelity tier, caching whatever the tier
/// can reuse across steps.
#[derive(Debug)]
pub struct Planner {
    tier: Tier,
    params: PlumeParams,
    grid: GridSpec,
    quad: QuadratureSpec,
    convolver: Option<SnrConvolver>,
}

impl Planner {
    pub fn new(tier: Tier, params: &PlumeParams, grid: &GridSpec, quad: QuadratureSpec) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        quad.validate()?;
        let convolver = match tier {
            Tier::SnrFft => Some(SnrConvolver::from_params(params, grid)?),
            _ => None,
        };
        Ok(Self { tier, params: *params, grid: *grid, quad, convolver })
    }

    pub fn tier(&self) -> Tier {
        self.tier
    }

    pub fn score_map(&self, post: &SourcePosterior, prior: &SourcePosterior) -> Result<ScoreMap> {
        match self.tier {
            Tier::SnrFft => self
                .convolver
                .as_ref()
                .expect("snr tier always builds a convolver")
                .score_map(post),
            Tier::ExpectedMeasurement => {
                let values = (0..self.grid.measurement_len())
                    .map(|c| eig_at_expected_measurement(post, prior, self.grid.measurement_center(c), &self.params))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ScoreMap::new(&self.grid, values, Tier::ExpectedMeasurement))
            }
            Tier::Exact => {
                let values = (0..self.grid.measurement_len())
                    .map(|c| eig_exact(post, prior, self.grid.measurement_center(c), &self.params, &self.quad))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ScoreMap::new(&self.grid, values, Tier::Exact))
            }
        }
    }
}
