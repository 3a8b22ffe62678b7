use rand::{Rng, RngCore};

use super::{require_sized, uniform_arm, CountMeanState, Policy};
use crate::context::{which_max_tied_among, ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

fn check_epsilon(epsilon: f64) -> Result<f64, ContractError> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(epsilon)
    } else {
        Err(ContractError::InvalidParameter(format!(
            "epsilon out of [0,1]: {epsilon}"
        )))
    }
}

/// Explores uniformly with probability `epsilon`, otherwise plays the arm
/// with the best running mean.
///
/// The logged propensity is that of the branch taken: `1 - epsilon` when
/// exploiting and `epsilon / k` when exploring. This is not the total
/// selection probability of the chosen arm.
#[derive(Debug, Clone)]
pub struct EpsilonGreedyPolicy {
    epsilon: f64,
    theta: CountMeanState,
}

impl EpsilonGreedyPolicy {
    pub fn new(epsilon: f64) -> Result<Self, ContractError> {
        Ok(Self {
            epsilon: check_epsilon(epsilon)?,
            theta: CountMeanState::default(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn state(&self) -> &CountMeanState {
        &self.theta
    }

    pub fn with_state(mut self, theta: CountMeanState) -> Self {
        self.theta = theta;
        self
    }
}

impl Policy for EpsilonGreedyPolicy {
    fn name(&self) -> &str {
        "EpsilonGreedy"
    }

    fn set_parameters(&mut self, k: usize, _d: Option<usize>) -> Result<(), ContractError> {
        self.theta = CountMeanState::new(k);
        Ok(())
    }

    fn get_action(
        &mut self,
        _t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        require_sized(self.theta.k(), context)?;
        // Exploit when u > epsilon. Written as the complement of u < epsilon
        // so that epsilon = 0 never reaches the zero-propensity branch.
        if rng.random::<f64>() < self.epsilon {
            self.theta.exploit = false;
            let (arm, p) = uniform_arm(context, rng);
            Ok(ActionChoice::new(arm, self.epsilon * p))
        } else {
            self.theta.exploit = true;
            let arm = which_max_tied_among(&self.theta.mean, &context.active_arms(), rng)?;
            Ok(ActionChoice::new(arm, 1.0 - self.epsilon))
        }
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

/// `1 / ln(100 t + 0.001)`, clamped into `[0, 1]`.
pub fn annealed_epsilon(t: usize) -> f64 {
    (1.0 / (100.0 * t as f64 + 0.001).ln()).clamp(0.0, 1.0)
}

/// Epsilon-greedy whose epsilon decays as [`annealed_epsilon`] of `t`.
#[derive(Debug, Clone)]
pub struct EpsilonGreedyAnnealingPolicy {
    inner: EpsilonGreedyPolicy,
}

impl EpsilonGreedyAnnealingPolicy {
    pub fn new() -> Self {
        Self {
            inner: EpsilonGreedyPolicy {
                epsilon: 1.0,
                theta: CountMeanState::default(),
            },
        }
    }

    /// Epsilon used by the most recent decision.
    pub fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }
}

impl Default for EpsilonGreedyAnnealingPolicy {
    fn default() -> Self {
        Self::new()
    }
}

impl Policy for EpsilonGreedyAnnealingPolicy {
    fn name(&self) -> &str {
        "EpsilonGreedyAnnealing"
    }

    fn set_parameters(&mut self, k: usize, d: Option<usize>) -> Result<(), ContractError> {
        self.inner.set_parameters(k, d)
    }

    fn get_action(
        &mut self,
        t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        self.inner.epsilon = annealed_epsilon(t);
        self.inner.get_action(t, context, rng)
    }

    fn set_reward(
        &mut self,
        t: usize,
        context: &ContextSnapshot,
        action: &ActionChoice,
        reward: &RewardOutcome,
    ) -> Result<(), ContractError> {
        self.inner.set_reward(t, context, action, reward)
    }

    fn theta(&self) -> serde_json::Value {
        self.inner.theta()
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}

/// Pure exploration for the first `budget` credited pulls, then pure
/// exploitation of the best mean.
///
/// Means stop updating once the post-increment pull total reaches
/// `budget - 1`, exactly as in the reference implementation of this policy;
/// the last exploratory reward is counted but not averaged in.
#[derive(Debug, Clone)]
pub struct EpsilonFirstPolicy {
    budget: u64,
    theta: CountMeanState,
}

impl EpsilonFirstPolicy {
    /// Budget `ceil(epsilon * horizon)`.
    pub fn new(epsilon: f64, horizon: u64) -> Result<Self, ContractError> {
        let epsilon = check_epsilon(epsilon)?;
        Ok(Self::with_budget((epsilon * horizon as f64).ceil() as u64))
    }

    /// Explicit exploration length in steps.
    pub fn with_budget(budget: u64) -> Self {
        Self {
            budget,
            theta: CountMeanState::default(),
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn state(&self) -> &CountMeanState {
        &self.theta
    }
}

impl Policy for EpsilonFirstPolicy {
    fn name(&self) -> &str {
        "EpsilonFirst"
    }

    fn set_parameters(&mut self, k: usize, _d: Option<usize>) -> Result<(), ContractError> {
        self.theta = CountMeanState::new(k);
        Ok(())
    }

    fn get_action(
        &mut self,
        _t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        require_sized(self.theta.k(), context)?;
        if self.theta.total_pulls() < self.budget {
            let (arm, p) = uniform_arm(context, rng);
            Ok(ActionChoice::new(arm, p))
        } else {
            let arm = which_max_tied_among(&self.theta.mean, &context.active_arms(), rng)?;
            Ok(ActionChoice::new(arm, 1.0))
        }
    }

    fn set_reward(
        &mut self,
        _t: usize,
        _context: &ContextSnapshot,
        action: &ActionChoice,
        reward: &RewardOutcome,
    ) -> Result<(), ContractError> {
        self.theta.check(action.choice)?;
        self.theta.count(action.choice);
        if self.theta.total_pulls() < self.budget.saturating_sub(1) {
            self.theta.update_mean(action.choice, reward.reward);
        }
        Ok(())
    }

    fn theta(&self) -> serde_json::Value {
        serde_json::to_value(&self.theta).unwrap_or_default()
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
