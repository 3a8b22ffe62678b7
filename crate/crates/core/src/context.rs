//! Values exchanged between bandits and policies within one step.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ContractError;

/// What a bandit reveals at step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSnapshot {
    /// Number of arms.
    pub k: usize,
    /// Feature count; `None` in context-free settings.
    pub d: Option<usize>,
    /// `d × k` feature matrix, one column per arm.
    pub x: Option<DMatrix<f64>>,
    /// Currently active arms (1-based). `None` means all `k` arms.
    pub arms: Option<Vec<usize>>,
    /// True expected reward per arm, for oracle policies.
    pub expected_rewards: Option<Vec<f64>>,
}

impl ContextSnapshot {
    /// Context-free snapshot carrying only the arm count.
    pub fn arms_only(k: usize) -> Self {
        Self {
            k,
            d: None,
            x: None,
            arms: None,
            expected_rewards: None,
        }
    }

    /// Snapshot over a `d × k` feature matrix.
    pub fn with_features(x: DMatrix<f64>) -> Self {
        Self {
            k: x.ncols(),
            d: Some(x.nrows()),
            x: Some(x),
            arms: None,
            expected_rewards: None,
        }
    }

    pub fn with_expected_rewards(mut self, expected: Vec<f64>) -> Self {
        self.expected_rewards = Some(expected);
        self
    }

    pub fn with_active_arms(mut self, arms: Vec<usize>) -> Self {
        self.arms = Some(arms);
        self
    }

    /// Active arms, 1-based, in ascending order of appearance.
    pub fn active_arms(&self) -> Vec<usize> {
        match &self.arms {
            Some(arms) => arms.clone(),
            None => (1..=self.k).collect(),
        }
    }

    pub fn is_active(&self, arm: usize) -> bool {
        match &self.arms {
            Some(arms) => arms.contains(&arm),
            None => (1..=self.k).contains(&arm),
        }
    }

    /// Checks the shape invariants of the snapshot.
    pub fn validate(&self) -> Result<(), ContractError> {
        if self.k == 0 {
            return Err(ContractError::InvalidParameter(
                "k must be at least 1".into(),
            ));
        }
        if let Some(x) = &self.x {
            if x.ncols() != self.k {
                return Err(ContractError::DimensionMismatch {
                    expected: self.k,
                    got: x.ncols(),
                });
            }
            if let Some(d) = self.d {
                if x.nrows() != d {
                    return Err(ContractError::DimensionMismatch {
                        expected: d,
                        got: x.nrows(),
                    });
                }
            }
        }
        if let Some(arms) = &self.arms {
            for (i, &arm) in arms.iter().enumerate() {
                if arm == 0 || arm > self.k {
                    return Err(ContractError::ArmOutOfRange { arm, k: self.k });
                }
                if arms[..i].contains(&arm) {
                    return Err(ContractError::InvalidParameter(format!(
                        "arm {arm} listed twice among active arms"
                    )));
                }
            }
        }
        if let Some(expected) = &self.expected_rewards {
            if expected.len() != self.k {
                return Err(ContractError::DimensionMismatch {
                    expected: self.k,
                    got: expected.len(),
                });
            }
        }
        Ok(())
    }
}

/// A policy's decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionChoice {
    /// Chosen arm, 1-based.
    pub choice: usize,
    /// Probability with which the policy selected `choice`, when known.
    pub propensity: Option<f64>,
}

impl ActionChoice {
    pub fn new(choice: usize, propensity: f64) -> Self {
        Self {
            choice,
            propensity: Some(propensity),
        }
    }

    pub fn without_propensity(choice: usize) -> Self {
        Self {
            choice,
            propensity: None,
        }
    }

    /// Checks the choice against the context and the propensity range.
    pub fn validate(&self, context: &ContextSnapshot) -> Result<(), ContractError> {
        check_arm(self.choice, context.k)?;
        if !context.is_active(self.choice) {
            return Err(ContractError::InactiveArm { arm: self.choice });
        }
        if let Some(p) = self.propensity {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ContractError::InvalidPropensity(p));
            }
        }
        Ok(())
    }
}

/// Bandit feedback for one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardOutcome {
    pub reward: f64,
    pub optimal_reward: Option<f64>,
    /// Optimal arm, 1-based.
    pub optimal_arm: Option<usize>,
}

impl RewardOutcome {
    pub fn reward_only(reward: f64) -> Self {
        Self {
            reward,
            optimal_reward: None,
            optimal_arm: None,
        }
    }
}

pub(crate) fn check_arm(arm: usize, k: usize) -> Result<(), ContractError> {
    if arm == 0 || arm > k {
        Err(ContractError::ArmOutOfRange { arm, k })
    } else {
        Ok(())
    }
}

/// 1-based index of a maximum of `values`, breaking ties uniformly at random.
///
/// The generator is only consulted when more than one entry attains the
/// maximum.
pub fn which_max_tied<R: Rng + ?Sized>(
    values: &[f64],
    rng: &mut R,
) -> Result<usize, ContractError> {
    let mut best = f64::NEG_INFINITY;
    let mut tied: Vec<usize> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(ContractError::NonFinite(v));
        }
        if v > best {
            best = v;
            tied.clear();
            tied.push(i + 1);
        } else if v == best {
            tied.push(i + 1);
        }
    }
    match tied.len() {
        0 => Err(ContractError::Empty),
        1 => Ok(tied[0]),
        m => Ok(tied[rng.random_range(0..m)]),
    }
}

/// Maximum over a subset of arms; `arms` are 1-based and index into `values`.
pub(crate) fn which_max_tied_among<R: Rng + ?Sized>(
    values: &[f64],
    arms: &[usize],
    rng: &mut R,
) -> Result<usize, ContractError> {
    let restricted: Vec<f64> = arms.iter().map(|&a| values[a - 1]).collect();
    let i = which_max_tied(&restricted, rng)?;
    Ok(arms[i - 1])
}

/// Feature vector of `arm` (column `arm` of `X`).
pub fn get_arm_context(
    context: &ContextSnapshot,
    arm: usize,
) -> Result<DVector<f64>, ContractError> {
    let x = context.x.as_ref().ok_or(ContractError::MissingFeatures)?;
    check_arm(arm, x.ncols())?;
    Ok(x.column(arm - 1).into_owned())
}

/// The full `d × k` feature matrix.
pub fn get_full_context(context: &ContextSnapshot) -> Result<&DMatrix<f64>, ContractError> {
    context.x.as_ref().ok_or(ContractError::MissingFeatures)
}
