use std::sync::Arc;

use nalgebra::DMatrix;
use rand::RngCore;

use super::dataset::{LoggedDataset, LoggedEvent};
use crate::bandit::Bandit;
use crate::context::{check_arm, ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

/// The logged context vector repeated in every arm column.
fn recycled_context(event: &LoggedEvent, k: usize) -> ContextSnapshot {
    let d = event.context.len();
    ContextSnapshot::with_features(DMatrix::from_fn(d, k, |i, _| event.context[i]))
}

fn event_at(data: &LoggedDataset, t: usize) -> Result<&LoggedEvent, ContractError> {
    data.get(t).ok_or(ContractError::InvalidParameter(format!(
        "step {t} is past the end of the log"
    )))
}

/// Replays a log, crediting only events whose logged action matches the
/// policy's choice. Step `t` reads event `t`; the run ends when the log does.
#[derive(Debug, Clone)]
pub struct ReplayBandit {
    data: Arc<LoggedDataset>,
}

impl ReplayBandit {
    pub fn new(data: Arc<LoggedDataset>) -> Self {
        Self { data }
    }

    pub fn dataset(&self) -> &LoggedDataset {
        &self.data
    }
}

impl Bandit for ReplayBandit {
    fn name(&self) -> &str {
        "OfflineReplayEvaluatorBandit"
    }

    fn k(&self) -> usize {
        self.data.k()
    }

    fn d(&self) -> Option<usize> {
        Some(self.data.d())
    }

    fn get_context(
        &mut self,
        t: usize,
        _rng: &mut dyn RngCore,
    ) -> Result<Option<ContextSnapshot>, ContractError> {
        Ok(self.data.get(t).map(|e| recycled_context(e, self.data.k())))
    }

    fn get_reward(
        &mut self,
        t: usize,
        _context: &ContextSnapshot,
        action: &ActionChoice,
        _rng: &mut dyn RngCore,
    ) -> Result<Option<RewardOutcome>, ContractError> {
        check_arm(action.choice, self.k())?;
        let event = event_at(&self.data, t)?;
        Ok((event.choice == action.choice).then(|| RewardOutcome::reward_only(event.reward)))
    }

    fn clone_box(&self) -> Box<dyn Bandit> {
        Box::new(self.clone())
    }
}

/// Credits every logged event with `1{a_t = choice} · r_t / p_t`.
#[derive(Debug, Clone)]
pub struct PropensityBandit {
    data: Arc<LoggedDataset>,
}

impl PropensityBandit {
    pub fn new(data: Arc<LoggedDataset>) -> Self {
        Self { data }
    }

    pub fn dataset(&self) -> &LoggedDataset {
        &self.data
    }
}

impl Bandit for PropensityBandit {
    fn name(&self) -> &str {
        "OfflinePropensityWeightingBandit"
    }

    fn k(&self) -> usize {
        self.data.k()
    }

    fn d(&self) -> Option<usize> {
        Some(self.data.d())
    }

    fn get_context(
        &mut self,
        t: usize,
        _rng: &mut dyn RngCore,
    ) -> Result<Option<ContextSnapshot>, ContractError> {
        Ok(self.data.get(t).map(|e| recycled_context(e, self.data.k())))
    }

    fn get_reward(
        &mut self,
        t: usize,
        _context: &ContextSnapshot,
        action: &ActionChoice,
        _rng: &mut dyn RngCore,
    ) -> Result<Option<RewardOutcome>, ContractError> {
        check_arm(action.choice, self.k())?;
        let event = event_at(&self.data, t)?;
        let p = event.require_propensity(t)?;
        let reward = if event.choice == action.choice {
            event.reward / p
        } else {
            0.0
        };
        Ok(Some(RewardOutcome::reward_only(reward)))
    }

    fn clone_box(&self) -> Box<dyn Bandit> {
        Box::new(self.clone())
    }
}
