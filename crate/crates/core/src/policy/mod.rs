//! Arm-selection strategies.

mod epsilon;
mod linucb;
mod random;
mod thompson;
mod ucb1;

pub use epsilon::{
    annealed_epsilon, EpsilonFirstPolicy, EpsilonGreedyAnnealingPolicy, EpsilonGreedyPolicy,
};
pub use linucb::{LinUcbArmState, LinUcbDisjointPolicy};
pub use random::{OraclePolicy, RandomPolicy};
pub use thompson::{BetaArmState, ThompsonSamplingPolicy};
pub use ucb1::Ucb1Policy;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::context::{ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

/// Chooses arms and learns from rewards.
///
/// `t` counts the decisions that have been credited with a reward so far,
/// plus one: it is the 1-based index of the decision being made (or being
/// rewarded).
pub trait Policy: Send + Sync {
    /// Display name of the policy class.
    fn name(&self) -> &str;

    /// Sizes the parameter store for `k` arms and `d` features.
    fn set_parameters(&mut self, k: usize, d: Option<usize>) -> Result<(), ContractError>;

    fn get_action(
        &mut self,
        t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError>;

    fn set_reward(
        &mut self,
        t: usize,
        context: &ContextSnapshot,
        action: &ActionChoice,
        reward: &RewardOutcome,
    ) -> Result<(), ContractError>;

    /// Snapshot of the parameter store.
    fn theta(&self) -> serde_json::Value;

    fn clone_box(&self) -> Box<dyn Policy>;
}

impl std::fmt::Debug for dyn Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Clone for Box<dyn Policy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Per-arm pull counts and running mean rewards.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountMeanState {
    pub n: Vec<u64>,
    pub mean: Vec<f64>,
    /// Whether the last decision exploited (epsilon-greedy bookkeeping).
    pub exploit: bool,
}

impl CountMeanState {
    pub fn new(k: usize) -> Self {
        Self {
            n: vec![0; k],
            mean: vec![0.0; k],
            exploit: false,
        }
    }

    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn total_pulls(&self) -> u64 {
        self.n.iter().sum()
    }

    /// `n += 1; mean += (r - mean) / n` for `arm` (1-based).
    pub fn credit(&mut self, arm: usize, reward: f64) {
        self.count(arm);
        self.update_mean(arm, reward);
    }

    pub(crate) fn count(&mut self, arm: usize) {
        self.n[arm - 1] += 1;
    }

    pub(crate) fn update_mean(&mut self, arm: usize, reward: f64) {
        let i = arm - 1;
        self.mean[i] += (reward - self.mean[i]) / self.n[i] as f64;
    }

    pub(crate) fn check(&self, arm: usize) -> Result<(), ContractError> {
        crate::context::check_arm(arm, self.k())
    }
}

/// Uniform draw over the active arms with its propensity.
pub(crate) fn uniform_arm(context: &ContextSnapshot, rng: &mut dyn RngCore) -> (usize, f64) {
    use rand::Rng;
    let arms = context.active_arms();
    let arm = arms[rng.random_range(0..arms.len())];
    (arm, 1.0 / arms.len() as f64)
}

pub(crate) fn require_sized(k: usize, context: &ContextSnapshot) -> Result<(), ContractError> {
    if k != context.k {
        return Err(ContractError::DimensionMismatch {
            expected: k,
            got: context.k,
        });
    }
    Ok(())
}
