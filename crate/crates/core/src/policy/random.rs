use rand::RngCore;
use serde_json::json;

use super::{uniform_arm, Policy};
use crate::context::{which_max_tied_among, ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

/// Uniformly random arm among the active arms.
#[derive(Debug, Clone, Default)]
pub struct RandomPolicy;

impl RandomPolicy {
    pub fn new() -> Self {
        Self
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "Random"
    }

    fn set_parameters(&mut self, _k: usize, _d: Option<usize>) -> Result<(), ContractError> {
        Ok(())
    }

    fn get_action(
        &mut self,
        _t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        let (arm, p) = uniform_arm(context, rng);
        Ok(ActionChoice::new(arm, p))
    }

    fn set_reward(
        &mut self,
        _t: usize,
        _context: &ContextSnapshot,
        _action: &ActionChoice,
        _reward: &RewardOutcome,
    ) -> Result<(), ContractError> {
        Ok(())
    }

    fn theta(&self) -> serde_json::Value {
        json!({})
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}

/// Plays the arm with the highest true expected reward, read from the
/// bandit's `expected_rewards` side channel.
#[derive(Debug, Clone, Default)]
pub struct OraclePolicy;

impl OraclePolicy {
    pub fn new() -> Self {
        Self
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "Oracle"
    }

    fn set_parameters(&mut self, _k: usize, _d: Option<usize>) -> Result<(), ContractError> {
        Ok(())
    }

    fn get_action(
        &mut self,
        _t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        let expected = context
            .expected_rewards
            .as_ref()
            .ok_or(ContractError::NoExpectedRewards)?;
        let arm = which_max_tied_among(expected, &context.active_arms(), rng)?;
        Ok(ActionChoice::new(arm, 1.0))
    }

    fn set_reward(
        &mut self,
        _t: usize,
        _context: &ContextSnapshot,
        _action: &ActionChoice,
        _reward: &RewardOutcome,
    ) -> Result<(), ContractError> {
        Ok(())
    }

    fn theta(&self) -> serde_json::Value {
        json!({})
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
