use std::sync::Arc;

use rand::RngCore;

use crate::bandit::Bandit;
use crate::context::{check_arm, ActionChoice, RewardOutcome};
use crate::error::ContractError;
use crate::history::StepRecord;
use crate::policy::Policy;

/// Result of one [`Agent::do_step`].
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    /// The policy was credited; `record.t` is the new policy step count.
    Record(StepRecord),
    /// The bandit withheld the reward (offline row not matched).
    Skipped,
    /// A data-backed bandit has no more rows.
    Exhausted,
}

/// What to copy into each [`StepRecord`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StepOptions {
    pub sim: usize,
    pub save_context: bool,
    pub save_theta: bool,
}

/// One policy bound to one bandit.
///
/// `agent_t` counts every step taken; `policy_t` counts the steps whose
/// reward reached the policy. They differ only for bandits that skip.
#[derive(Clone)]
pub struct Agent {
    name: Arc<str>,
    policy: Box<dyn Policy>,
    bandit: Box<dyn Bandit>,
    agent_t: usize,
    policy_t: usize,
}

impl std::fmt::Debug for Agent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Agent")
            .field("name", &self.name)
            .field("policy", &self.policy.name())
            .field("bandit", &self.bandit.name())
            .field("agent_t", &self.agent_t)
            .field("policy_t", &self.policy_t)
            .finish()
    }
}

impl Agent {
    /// Agent named after its policy class.
    pub fn new(policy: impl Policy + 'static, bandit: impl Bandit + 'static) -> Self {
        let name = policy.name().to_string();
        Self::from_boxed(Box::new(policy), Box::new(bandit), name)
    }

    pub fn named(
        policy: impl Policy + 'static,
        bandit: impl Bandit + 'static,
        name: impl Into<String>,
    ) -> Self {
        Self::from_boxed(Box::new(policy), Box::new(bandit), name)
    }

    pub fn from_boxed(
        policy: Box<dyn Policy>,
        bandit: Box<dyn Bandit>,
        name: impl Into<String>,
    ) -> Self {
        Self {
            name: Arc::from(name.into()),
            policy,
            bandit,
            agent_t: 0,
            policy_t: 0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn agent_t(&self) -> usize {
        self.agent_t
    }

    pub fn policy_t(&self) -> usize {
        self.policy_t
    }

    pub fn policy(&self) -> &dyn Policy {
        self.policy.as_ref()
    }

    pub fn bandit(&self) -> &dyn Bandit {
        self.bandit.as_ref()
    }

    /// Resets the counters, sizes the policy from the bandit and runs the
    /// bandit's lifecycle hooks.
    pub fn initialize(
        &mut self,
        horizon: usize,
        rng_bandit: &mut dyn RngCore,
    ) -> Result<(), ContractError> {
        self.agent_t = 0;
        self.policy_t = 0;
        self.policy
            .set_parameters(self.bandit.k(), self.bandit.d())?;
        self.bandit.post_initialization(rng_bandit);
        if self.bandit.precaching() {
            self.bandit.generate_bandit_data(horizon, rng_bandit);
        }
        Ok(())
    }

    /// get_context, get_action, get_reward, then set_reward unless the
    /// bandit withheld the reward.
    pub fn do_step(
        &mut self,
        rng_bandit: &mut dyn RngCore,
        rng_policy: &mut dyn RngCore,
        options: StepOptions,
    ) -> Result<Step, ContractError> {
        self.agent_t += 1;
        let Some(context) = self.bandit.get_context(self.agent_t, rng_bandit)? else {
            self.agent_t -= 1;
            return Ok(Step::Exhausted);
        };
        context.validate()?;

        let decision_t = self.policy_t + 1;
        let action: ActionChoice = self.policy.get_action(decision_t, &context, rng_policy)?;
        action.validate(&context)?;

        let Some(reward): Option<RewardOutcome> =
            self.bandit
                .get_reward(self.agent_t, &context, &action, rng_bandit)?
        else {
            return Ok(Step::Skipped);
        };
        if let Some(arm) = reward.optimal_arm {
            check_arm(arm, context.k)?;
        }

        self.policy
            .set_reward(decision_t, &context, &action, &reward)?;
        self.policy_t = decision_t;

        let theta = options.save_theta.then(|| Box::new(self.policy.theta()));
        Ok(Step::Record(StepRecord {
            agent: self.name.clone(),
            sim: options.sim,
            t: self.policy_t,
            choice: action.choice,
            reward: reward.reward,
            optimal_reward: reward.optimal_reward,
            optimal_arm: reward.optimal_arm,
            propensity: action.propensity,
            context: options.save_context.then(|| Box::new(context)),
            theta,
        }))
    }
}
