//! Off-policy evaluation over logged interaction data.
//!
//! A log is a whitespace-separated text file, one event per line:
//! the logged action (1-based), the reward, optionally the propensity of the
//! logged action, then `d` context features.
//!
//! [`ReplayBandit`] implements the replay method: the evaluated policy is
//! only credited (and only learns) on events where its choice matches the
//! logged one. [`PropensityBandit`] credits every event with the
//! inverse-propensity weighted reward instead, so the mean credited reward
//! is the IPS estimate.
//!
//! The replay output `R / L` is a reward rate (cumulative matched reward per
//! matched event), even though it is often described as a regret rate.

mod bandits;
mod dataset;

pub use bandits::{PropensityBandit, ReplayBandit};
pub use dataset::{LoadError, LogFormat, LoggedDataset, LoggedEvent, RowError};

use crate::error::ContractError;
use crate::history::StepRecord;

/// `R / L` over the matched records of one agent and simulation, or `None`
/// when nothing matched.
pub fn replay_value<'a>(records: impl IntoIterator<Item = &'a StepRecord>) -> Option<f64> {
    let (sum, n) = records
        .into_iter()
        .fold((0.0, 0usize), |(s, n), r| (s + r.reward, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Inverse propensity scoring estimate of a deterministic target policy:
/// `(1/N) Σ 1{target(e) = a_e} r_e / p_e` over all `N` events.
pub fn ips_estimate(
    dataset: &LoggedDataset,
    mut target: impl FnMut(&LoggedEvent) -> usize,
) -> Result<f64, ContractError> {
    if dataset.is_empty() {
        return Err(ContractError::Empty);
    }
    let mut total = 0.0;
    for (i, event) in dataset.events().iter().enumerate() {
        let p = event.require_propensity(i + 1)?;
        if target(event) == event.choice {
            total += event.reward / p;
        }
    }
    Ok(total / dataset.len() as f64)
}
