use rand::RngCore;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{require_sized, Policy};
use crate::context::{
    check_arm, which_max_tied_among, ActionChoice, ContextSnapshot, RewardOutcome,
};
use crate::error::ContractError;

/// Beta posterior of one Bernoulli arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaArmState {
    pub alpha: f64,
    pub beta: f64,
}

/// Thompson sampling with Beta-Bernoulli conjugate updates.
///
/// Rewards must be exactly 0 or 1.
#[derive(Debug, Clone)]
pub struct ThompsonSamplingPolicy {
    alpha0: f64,
    beta0: f64,
    arms: Vec<BetaArmState>,
}

impl ThompsonSamplingPolicy {
    pub fn new(alpha0: f64, beta0: f64) -> Result<Self, ContractError> {
        for (name, v) in [("alpha0", alpha0), ("beta0", beta0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ContractError::InvalidParameter(format!(
                    "{name} {v} must be positive"
                )));
            }
        }
        Ok(Self {
            alpha0,
            beta0,
            arms: Vec::new(),
        })
    }

    pub fn arms(&self) -> &[BetaArmState] {
        &self.arms
    }

    pub fn with_arms(mut self, arms: Vec<BetaArmState>) -> Self {
        self.arms = arms;
        self
    }
}

impl Policy for ThompsonSamplingPolicy {
    fn name(&self) -> &str {
        "ThompsonSampling"
    }

    fn set_parameters(&mut self, k: usize, _d: Option<usize>) -> Result<(), ContractError> {
        self.arms = vec![
            BetaArmState {
                alpha: self.alpha0,
                beta: self.beta0,
            };
            k
        ];
        Ok(())
    }

    fn get_action(
        &mut self,
        _t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        require_sized(self.arms.len(), context)?;
        let active = context.active_arms();
        let mut samples = vec![f64::NEG_INFINITY; self.arms.len()];
        for &arm in &active {
            let s = self.arms[arm - 1];
            let beta = Beta::new(s.alpha, s.beta)
                .map_err(|e| ContractError::InvalidParameter(e.to_string()))?;
            samples[arm - 1] = beta.sample(rng);
        }
        let arm = which_max_tied_among(&samples, &active, rng)?;
        Ok(ActionChoice::without_propensity(arm))
    }

    fn set_reward(
        &mut self,
        _t: usize,
        _context: &ContextSnapshot,
        action: &ActionChoice,
        reward: &RewardOutcome,
    ) -> Result<(), ContractError> {
        check_arm(action.choice, self.arms.len())?;
        let arm = &mut self.arms[action.choice - 1];
        match reward.reward {
            1.0 => arm.alpha += 1.0,
            0.0 => arm.beta += 1.0,
            r => return Err(ContractError::NonBinaryReward(r)),
        }
        Ok(())
    }

    fn theta(&self) -> serde_json::Value {
        json!({
            "alpha": self.arms.iter().map(|a| a.alpha).collect::<Vec<_>>(),
            "beta": self.arms.iter().map(|a| a.beta).collect::<Vec<_>>(),
        })
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
