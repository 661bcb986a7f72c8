//! Baseline motion policies.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::AgentState;
use crate::field::{GridSpec, Point};
use crate::planner::{movement_cost, CostModel};

/// A uniformly random measurement cell center.
pub fn random_policy<R: Rng + ?Sized>(_agent: &AgentState, grid: &GridSpec, rng: &mut R) -> Point {
    grid.measurement_center(rng.random_range(0..grid.measurement_len()))
}

/// A measurement cell drawn with probability ∝ 1 / movement_cost(agent → cell).
pub fn cost_only_policy<R: Rng + ?Sized>(agent: &AgentState, grid: &GridSpec, cm: &CostModel, rng: &mut R) -> Point {
    let weights = (0..grid.measurement_len())
        .map(|idx| 1.0 / movement_cost(agent.position, grid.measurement_center(idx), cm));
    let dist = WeightedIndex::new(weights).expect("inverse costs are positive and finite");
    grid.measurement_center(dist.sample(rng))
}
