//! Hybrid reinforcement learning layer: five high-level actions on top of
//! the Bayesian belief machinery, a blended reward, and a small DQN.

mod env;
mod qnet;
mod replay;
mod train;

use serde::{Deserialize, Serialize};

pub use env::{EnvConfig, HybridEnv, StepOutcome};
pub use qnet::{td_targets, td_train_step, td_train_step_masked, Dense, Gradients, QNet};
pub use replay::{ReplayBuffer, Transition};
pub use train::{epsilon, smooth_trailing, train, CurvePoint, TrainConfig, TrainMode, TrainResult};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    DoNothing = 0,
    Move = 1,
    Measure = 2,
    Update = 3,
    Communicate = 4,
}

impl Action {
    pub const COUNT: usize = 5;
    pub const ALL: [Action; 5] = [Action::DoNothing, Action::Move, Action::Measure, Action::Update, Action::Communicate];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Panics when `idx >= 5`.
    pub fn from_index(idx: usize) -> Action {
        Action::ALL[idx]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::DoNothing => "do-nothing",
            Action::Move => "move",
            Action::Measure => "measure",
            Action::Update => "update",
            Action::Communicate => "communicate",
        }
    }
}

/// Which actions a policy may choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionMask(u8);

impl ActionMask {
    pub const ALL: ActionMask = ActionMask(0b11111);
    pub const NO_COMMUNICATE: ActionMask = ActionMask(0b01111);

    pub fn allows(self, a: Action) -> bool {
        self.0 & (1 << a.index()) != 0
    }

    /// Disallowed choices collapse to `DoNothing`.
    pub fn remap(self, a: Action) -> Action {
        if self.allows(a) {
            a
        } else {
            Action::DoNothing
        }
    }
}

pub const OBSERVATION_LEN: usize = 17;

/// Index → meaning of every observation entry.
pub const OBSERVATION_FIELDS: [&str; OBSERVATION_LEN] = [
    "pos_x",
    "pos_y",
    "vel_x",
    "vel_y",
    "wind_x",
    "wind_y",
    "last_concentration",
    "estimate_x",
    "estimate_y",
    "ig_since_start",
    "moved_since_measure",
    "repeated_action",
    "last_do_nothing",
    "last_move",
    "last_measure",
    "last_update",
    "last_communicate",
];

/// Divisor and range applied to each raw quantity before it enters an observation.
pub const NORMALIZATION: [(&str, &str, &str); 6] = [
    ("position, estimate", "(v - min) / world extent", "[0, 1]"),
    ("velocity", "v / v_max", "[-1, 1]"),
    ("wind", "w / w_max", "[-1, 1]"),
    ("concentration", "m / strength, clamped", "[0, 1]"),
    ("ig", "bits / log2(source cells), clamped", "[0, 1]"),
    ("flags, one-hot", "as is", "{0, 1}"),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation(pub [f64; OBSERVATION_LEN]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn one_hot(&self) -> &[f64] {
        &self.0[12..17]
    }

    pub fn get(&self, field: &str) -> Option<f64> {
        OBSERVATION_FIELDS.iter().position(|f| *f == field).map(|i| self.0[i])
    }

    /// Layout invariants: flags binary, one-hot with at most one set entry,
    /// continuous entries inside their normalized ranges.
    pub fn check(&self) -> Result<()> {
        let v = &self.0;
        let within = |x: f64, lo: f64, hi: f64| x.is_finite() && x >= lo && x <= hi;
        let ok_cont = [0, 1, 6, 7, 8, 9].iter().all(|&i| within(v[i], 0.0, 1.0))
            && [2, 3, 4, 5].iter().all(|&i| within(v[i], -1.0, 1.0));
        let ok_flags = v[10..].iter().all(|&x| x == 0.0 || x == 1.0);
        let hot: f64 = self.one_hot().iter().sum();
        if ok_cont && ok_flags && (hot == 0.0 || hot == 1.0) {
            Ok(())
        } else {
            Err(Error::config(format!("observation out of layout: {v:?}")))
        }
    }
}

impl AsRef<[f64]> for Observation {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub w_info: f64,
    pub w_est: f64,
    pub c_nothing: f64,
    pub c_move: f64,
    pub c_measure: f64,
    pub c_update: f64,
    pub c_comm: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { w_info: 1.0, w_est: 1.0, c_nothing: 0.0, c_move: 0.2, c_measure: 0.1, c_update: 0.1, c_comm: 0.3 }
    }
}

/// The three additive parts of one reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTerms {
    pub info: f64,
    pub estimate: f64,
    pub action_cost: f64,
}

impl RewardTerms {
    pub fn total(&self) -> f64 {
        self.info + self.estimate - self.action_cost
    }

    /// Share of the reward magnitude owed to the information term.
    pub fn info_share(&self) -> f64 {
        let denom = self.info.abs() + self.estimate.abs() + self.action_cost.abs();
        if denom == 0.0 {
            0.0
        } else {
            self.info.abs() / denom
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.w_info, self.w_est, self.c_nothing, self.c_move, self.c_measure, self.c_update, self.c_comm];
        if all.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(Error::config("reward weights and action costs must be finite and >= 0"))
        }
    }

    pub fn action_cost(&self, a: Action) -> f64 {
        match a {
            Action::DoNothing => self.c_nothing,
            Action::Move => self.c_move,
            Action::Measure => self.c_measure,
            Action::Update => self.c_update,
            Action::Communicate => self.c_comm,
        }
    }

    /// `delta_ig` in bits, `d` the estimate-to-source distance, `d_diag` the world diagonal.
    pub fn terms(&self, delta_ig: f64, d: f64, d_diag: f64, a: Action) -> RewardTerms {
        RewardTerms {
            info: self.w_info * delta_ig,
            estimate: self.w_est * (1.0 - d / d_diag),
            action_cost: self.action_cost(a),
        }
    }

    pub fn reward(&self, delta_ig: f64, d: f64, d_diag: f64, a: Action) -> f64 {
        self.terms(delta_ig, d, d_diag, a).total()
    }
}
