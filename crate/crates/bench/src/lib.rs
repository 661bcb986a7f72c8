//! Fixtures shared by the criterion benches.

use plumeseek_core::rng::mix;
use plumeseek_core::{GridSpec, MeasurementRecord, PlumeParams, Point, SourcePosterior};

/// n×n world with unit cells on both grids.
pub fn square_grid(n: usize) -> GridSpec {
    GridSpec::uniform(n as f64, n as f64, n, n)
}

pub fn plume() -> PlumeParams {
    PlumeParams::advected(1.0, Point::new(1.0, 0.25), 0.5, 0.15, 0.1)
}

/// Deterministic, strictly positive posterior.
pub fn posterior(grid: &GridSpec, seed: u64) -> SourcePosterior {
    let w: Vec<f64> = (0..grid.source_len())
        .map(|k| 1e-3 + (mix(seed, k as u64) >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    SourcePosterior::from_weights(grid, &w).expect("positive weights")
}

/// One measurement per agent at spread-out cell centers.
pub fn records(grid: &GridSpec, agents: usize) -> Vec<MeasurementRecord> {
    (0..agents)
        .map(|a| {
            let cell = (mix(7, a as u64) % grid.measurement_len() as u64) as usize;
            MeasurementRecord::new(grid.measurement_center(cell), 0.05 * a as f64, 0, a)
        })
        .collect()
}
