//! Synthetic environments.
//!
//! Every synthetic bandit draws rewards for all `k` arms on every step, in
//! arm order, before looking at the policy's choice. The bandit random
//! stream therefore evolves identically whatever the policy does, which is
//! what makes agents sharing a simulation index comparable.

mod bernoulli;
mod contextual;
mod gaussian;
mod poisson;

pub use bernoulli::BasicBernoulliBandit;
pub use contextual::ContextualBernoulliBandit;
pub use gaussian::{BasicGaussianBandit, GaussianArmSpec};
pub use poisson::BasicPoissonBandit;

use nalgebra::DMatrix;
use rand::RngCore;

use crate::context::{ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

/// Generates contexts and rewards.
pub trait Bandit: Send + Sync {
    /// Display name of the bandit class.
    fn name(&self) -> &str;

    /// Number of arms.
    fn k(&self) -> usize;

    /// Number of context features, if the bandit is contextual.
    fn d(&self) -> Option<usize>;

    /// Runs once per simulation after seeding, before step 1.
    fn post_initialization(&mut self, _rng: &mut dyn RngCore) {}

    /// Whether [`Bandit::generate_bandit_data`] should be called before a run.
    fn precaching(&self) -> bool {
        false
    }

    /// Pregenerates `n` steps of data. Must not change observable behaviour.
    fn generate_bandit_data(&mut self, _n: usize, _rng: &mut dyn RngCore) {}

    /// Context for step `t`, or `None` once a data-backed bandit is exhausted.
    fn get_context(
        &mut self,
        t: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Option<ContextSnapshot>, ContractError>;

    /// Reward for `action`, or `None` when the step must be skipped.
    fn get_reward(
        &mut self,
        t: usize,
        context: &ContextSnapshot,
        action: &ActionChoice,
        rng: &mut dyn RngCore,
    ) -> Result<Option<RewardOutcome>, ContractError>;

    fn clone_box(&self) -> Box<dyn Bandit>;
}

impl std::fmt::Debug for dyn Bandit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Clone for Box<dyn Bandit> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// A `d × k` matrix of per-feature, per-arm weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(DMatrix<f64>);

impl WeightMatrix {
    /// Builds the matrix from `d * k` values listed row by row.
    pub fn from_row_major(d: usize, k: usize, values: &[f64]) -> Result<Self, ContractError> {
        if d == 0 || k == 0 {
            return Err(ContractError::InvalidParameter(
                "weight matrix needs d >= 1 and k >= 1".into(),
            ));
        }
        if values.len() != d * k {
            return Err(ContractError::DimensionMismatch {
                expected: d * k,
                got: values.len(),
            });
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(ContractError::NonFinite(v));
        }
        Ok(Self(DMatrix::from_row_slice(d, k, values)))
    }

    /// Single-row matrix.
    pub fn from_row(values: &[f64]) -> Result<Self, ContractError> {
        Self::from_row_major(1, values.len(), values)
    }

    /// Rejects entries outside `[0, 1]`.
    pub fn ensure_probabilities(self) -> Result<Self, ContractError> {
        if let Some(&v) = self.0.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ContractError::InvalidParameter(format!(
                "weight {v} is not a probability"
            )));
        }
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }
}

/// What a Bernoulli bandit reports as `optimal_reward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimalReward {
    /// The reward the best arm drew at this step. Regret then compares two
    /// draws from the same step.
    #[default]
    Realized,
    /// The best arm's success probability.
    Expected,
}

impl OptimalReward {
    pub(crate) fn value(self, rewards: &[f64], weights: &[f64], optimal_arm: usize) -> f64 {
        match self {
            Self::Realized => rewards[optimal_arm - 1],
            Self::Expected => weights[optimal_arm - 1],
        }
    }
}

/// `1{w_a > u_a}` for `u_a ~ U(0, 1)`, drawn for every arm in order.
pub(crate) fn bernoulli_draws(weights: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
    use rand::Rng;
    weights
        .iter()
        .map(|&w| if w > rng.random::<f64>() { 1.0 } else { 0.0 })
        .collect()
}
