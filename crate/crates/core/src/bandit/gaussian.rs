use rand::RngCore;
use rand_distr::{Distribution, Normal};

use super::Bandit;
use crate::context::{check_arm, which_max_tied, ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

/// Mean and standard deviation of each arm's reward.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianArmSpec {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Context-free bandit with `Normal(mu_a, sigma_a)` rewards.
///
/// `optimal_reward` is the mean of the best arm.
#[derive(Debug, Clone)]
pub struct BasicGaussianBandit {
    spec: GaussianArmSpec,
    arms: Vec<Normal<f64>>,
}

impl BasicGaussianBandit {
    pub fn new(spec: GaussianArmSpec) -> Result<Self, ContractError> {
        if spec.mu.is_empty() {
            return Err(ContractError::InvalidParameter(
                "at least one arm required".into(),
            ));
        }
        if spec.mu.len() != spec.sigma.len() {
            return Err(ContractError::DimensionMismatch {
                expected: spec.mu.len(),
                got: spec.sigma.len(),
            });
        }
        let arms = spec
            .mu
            .iter()
            .zip(&spec.sigma)
            .map(|(&m, &s)| {
                if !m.is_finite() {
                    return Err(ContractError::NonFinite(m));
                }
                if !(s > 0.0 && s.is_finite()) {
                    return Err(ContractError::InvalidParameter(format!(
                        "sigma {s} must be positive"
                    )));
                }
                Normal::new(m, s).map_err(|e| ContractError::InvalidParameter(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { spec, arms })
    }
}

impl Bandit for BasicGaussianBandit {
    fn name(&self) -> &str {
        "BasicGaussianBandit"
    }

    fn k(&self) -> usize {
        self.arms.len()
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
            ContextSnapshot::arms_only(self.k()).with_expected_rewards(self.spec.mu.clone()),
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
        let rewards: Vec<f64> = self.arms.iter().map(|n| n.sample(rng)).collect();
        let optimal_arm = which_max_tied(&self.spec.mu, rng)?;
        Ok(Some(RewardOutcome {
            reward: rewards[action.choice - 1],
            optimal_reward: Some(self.spec.mu[optimal_arm - 1]),
            optimal_arm: Some(optimal_arm),
        }))
    }

    fn clone_box(&self) -> Box<dyn Bandit> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_seed, StreamKind};

    fn bandit(mu: &[f64], sigma: &[f64]) -> BasicGaussianBandit {
        BasicGaussianBandit::new(GaussianArmSpec {
            mu: mu.to_vec(),
            sigma: sigma.to_vec(),
        })
        .unwrap()
    }

    fn pull(b: &mut BasicGaussianBandit, arm: usize, rng: &mut crate::SimRng) -> RewardOutcome {
        let ctx = b.get_context(1, rng).unwrap().unwrap();
        b.get_reward(1, &ctx, &ActionChoice::without_propensity(arm), rng)
            .unwrap()
            .unwrap()
    }

    #[test]
    fn tied_means_split_optimal_arm() {
        let mut b = bandit(&[0.0, 0.0], &[1.0, 1.0]);
        let mut rng = derive_seed(0, 1, StreamKind::Bandit).rng();
        let n = 10_000;
        let first = (0..n)
            .filter(|_| pull(&mut b, 1, &mut rng).optimal_arm == Some(1))
            .count();
        let freq = first as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.02, "freq {freq}");
    }

    #[test]
    fn vanishing_variance() {
        let mut b = bandit(&[5.0], &[1e-6]);
        let mut rng = derive_seed(0, 1, StreamKind::Bandit).rng();
        let r = pull(&mut b, 1, &mut rng);
        assert!((r.reward - 5.0).abs() <= 1e-3);
        assert_eq!(r.optimal_reward, Some(5.0));
    }

    #[test]
    fn arm_mean_converges() {
        let mut b = bandit(&[1.0, 2.0], &[1.0, 1.0]);
        let mut rng = derive_seed(2, 1, StreamKind::Bandit).rng();
        let n = 100_000;
        let mean = (0..n)
            .map(|_| pull(&mut b, 2, &mut rng).reward)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 2.0).abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        assert!(BasicGaussianBandit::new(GaussianArmSpec {
            mu: vec![0.0],
            sigma: vec![0.0]
        })
        .is_err());
        assert!(BasicGaussianBandit::new(GaussianArmSpec {
            mu: vec![0.0, 1.0],
            sigma: vec![1.0]
        })
        .is_err());
    }
}
