use rand::RngCore;

use super::{bernoulli_draws, Bandit, OptimalReward, WeightMatrix};
use crate::context::{check_arm, which_max_tied, ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

/// Context-free Bernoulli bandit over a weight vector.
///
/// `optimal_reward` follows [`OptimalReward`], realized by default.
#[derive(Debug, Clone)]
pub struct BasicBernoulliBandit {
    weights: Vec<f64>,
    optimum: OptimalReward,
}

impl BasicBernoulliBandit {
    pub fn new(weights: Vec<f64>) -> Result<Self, ContractError> {
        let w = WeightMatrix::from_row(&weights)?.ensure_probabilities()?;
        Ok(Self {
            weights: w.row(0),
            optimum: OptimalReward::default(),
        })
    }

    pub fn with_optimal_reward(mut self, optimum: OptimalReward) -> Self {
        self.optimum = optimum;
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Bandit for BasicBernoulliBandit {
    fn name(&self) -> &str {
        "BasicBernoulliBandit"
    }

    fn k(&self) -> usize {
        self.weights.len()
    }

    fn d(&self) -> Option<usize> {
        None
    }

    fn get_context(
        &mut self,
        _t: usize,
        _rng: &mut dyn RngCore,
    ) -> Result<Option<ContextSnapshot>, ContractError> {
        Ok(Some(
            ContextSnapshot::arms_only(self.k()).with_expected_rewards(self.weights.clone()),
        ))
    }

    fn get_reward(
        &mut self,
        _t: usize,
        _context: &ContextSnapshot,
        action: &ActionChoice,
        rng: &mut dyn RngCore,
    ) -> Result<Option<RewardOutcome>, ContractError> {
        check_arm(action.choice, self.k())?;
        let rewards = bernoulli_draws(&self.weights, rng);
        let optimal_arm = which_max_tied(&self.weights, rng)?;
        Ok(Some(RewardOutcome {
            reward: rewards[action.choice - 1],
            optimal_reward: Some(self.optimum.value(&rewards, &self.weights, optimal_arm)),
            optimal_arm: Some(optimal_arm),
        }))
    }

    fn clone_box(&self) -> Box<dyn Bandit> {
        Box::new(self.clone())
    }
}
