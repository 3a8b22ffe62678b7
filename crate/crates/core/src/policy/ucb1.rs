use rand::RngCore;

use super::{require_sized, CountMeanState, Policy};
use crate::context::{which_max_tied_among, ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

/// UCB1: plays every arm once, then the arm maximising
/// `mean_a + sqrt(2 ln t / n_a)`.
#[derive(Debug, Clone, Default)]
pub struct Ucb1Policy {
    theta: CountMeanState,
}

impl Ucb1Policy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_state(theta: CountMeanState) -> Self {
        Self { theta }
    }

    pub fn state(&self) -> &CountMeanState {
        &self.theta
    }

    /// Upper confidence index of `arm` at step `t`; `None` for unplayed arms.
    pub fn index(&self, arm: usize, t: usize) -> Option<f64> {
        let n = self.theta.n[arm - 1];
        (n > 0).then(|| self.theta.mean[arm - 1] + (2.0 * (t as f64).ln() / n as f64).sqrt())
    }
}

impl Policy for Ucb1Policy {
    fn name(&self) -> &str {
        "UCB1"
    }

    fn set_parameters(&mut self, k: usize, _d: Option<usize>) -> Result<(), ContractError> {
        self.theta = CountMeanState::new(k);
        Ok(())
    }

    fn get_action(
        &mut self,
        t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        require_sized(self.theta.k(), context)?;
        let arms = context.active_arms();
        if let Some(&unplayed) = arms.iter().filter(|&&a| self.theta.n[a - 1] == 0).min() {
            return Ok(ActionChoice::new(unplayed, 1.0));
        }
        let indices: Vec<f64> = (1..=self.theta.k())
            .map(|a| self.index(a, t.max(1)).unwrap_or(f64::NEG_INFINITY))
            .collect();
        let arm = which_max_tied_among(&indices, &arms, rng)?;
        Ok(ActionChoice::new(arm, 1.0))
    }

    fn set_reward(
        &mut self,
        _t: usize,
        _context: &ContextSnapshot,
        action: &ActionChoice,
        reward: &RewardOutcome,
    ) -> Result<(), ContractError> {
        self.theta.check(action.choice)?;
        self.theta.credit(action.choice, reward.reward);
        Ok(())
    }

    fn theta(&self) -> serde_json::Value {
        serde_json::to_value(&self.theta).unwrap_or_default()
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
