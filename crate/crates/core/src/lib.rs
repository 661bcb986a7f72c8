//! Information-driven multi-agent plume source localization.
//!
//! - [`field`]: world geometry and the deterministic plume model.
//! - [`belief`]: grid Bayesian inference and information gain.
//! - [`planner`]: expected-information scoring and next-location selection.
//! - [`sim`]: the multi-agent measure / share / update / plan / move loop.
//! - [`rl`]: the hybrid high-level action environment and a small DQN.
//! - [`config`] and [`report`]: run configuration and result files.

pub mod belief;
pub mod config;
pub mod error;
pub mod field;
pub mod planner;
pub mod report;
pub mod rl;
pub mod rng;
pub mod sim;

pub use belief::{info_gain_bits, log_likelihood, posterior_update, MeasurementRecord, PosteriorSummary, SourcePosterior};
pub use error::{Error, Result};
pub use field::{concentration, snr_area_fraction, squared_snr_kernel, GridSpec, PlumeKind, PlumeParams, Point, SnrKernel, SourceLocation};
pub use planner::{movement_cost, select_next, CostModel, Planner, QuadratureSpec, ScoreMap, Tier};
pub use config::RunConfig;
pub use rl::{Action, EnvConfig, HybridEnv, Observation, QNet, RewardWeights, TrainConfig, TrainMode};
pub use sim::{run_episode, EpisodeLog, MotionPolicy, SimConfig, SourcePlacement};
