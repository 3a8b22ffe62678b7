use rand::RngCore;
use rand_distr::{Distribution, Poisson};

use super::Bandit;
use crate::context::{check_arm, which_max_tied, ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

const REWARD_MEAN: f64 = 2.0;

/// Context-free bandit paying `1{p_a < w_a}` with `p_a ~ Poisson(2)`.
///
/// Unlike the Bernoulli bandits, `optimal_reward` is the realized reward of
/// the best-weighted arm on this step, not its expectation.
#[derive(Debug, Clone)]
pub struct BasicPoissonBandit {
    weights: Vec<f64>,
    poisson: Poisson<f64>,
}

impl BasicPoissonBandit {
    pub fn new(weights: Vec<f64>) -> Result<Self, ContractError> {
        if weights.is_empty() {
            return Err(ContractError::InvalidParameter(
                "at least one arm required".into(),
            ));
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(ContractError::NonFinite(w));
        }
        let poisson = Poisson::new(REWARD_MEAN)
            .map_err(|e| ContractError::InvalidParameter(e.to_string()))?;
        Ok(Self { weights, poisson })
    }

    /// `P(Poisson(2) < w)` for every arm.
    pub fn expected_rewards(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|&w| poisson_below(REWARD_MEAN, w))
            .collect()
    }
}

/// `P(X < bound)` for `X ~ Poisson(lambda)`.
fn poisson_below(lambda: f64, bound: f64) -> f64 {
    if bound <= 0.0 {
        return 0.0;
    }
    let mut term = (-lambda).exp();
    let mut total = 0.0;
    let mut j = 0.0;
    while j < bound {
        total += term;
        j += 1.0;
        term *= lambda / j;
        if term < 1e-300 {
            break;
        }
    }
    total.min(1.0)
}

impl Bandit for BasicPoissonBandit {
    fn name(&self) -> &str {
        "BasicPoissonBandit"
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
            ContextSnapshot::arms_only(self.k()).with_expected_rewards(self.expected_rewards()),
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
        let rewards: Vec<f64> = self
            .weights
            .iter()
            .map(|&w| {
                if self.poisson.sample(rng) < w {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let optimal_arm = which_max_tied(&self.weights, rng)?;
        Ok(Some(RewardOutcome {
            reward: rewards[action.choice - 1],
            optimal_reward: Some(rewards[optimal_arm - 1]),
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

    // scipy.stats.poisson.cdf(6, 2)
    const P_POISSON2_LE6: f64 = 0.995_466_194_473_751_2;

    fn pull(b: &mut BasicPoissonBandit, arm: usize, rng: &mut crate::SimRng) -> RewardOutcome {
        let ctx = b.get_context(1, rng).unwrap().unwrap();
        b.get_reward(1, &ctx, &ActionChoice::without_propensity(arm), rng)
            .unwrap()
            .unwrap()
    }

    #[test]
    fn heaviest_weight_is_optimal() {
        let mut b = BasicPoissonBandit::new(vec![7.0, 1.0, 2.0]).unwrap();
        let mut rng = derive_seed(0, 1, StreamKind::Bandit).rng();
        for _ in 0..20 {
            assert_eq!(pull(&mut b, 2, &mut rng).optimal_arm, Some(1));
        }
    }

    #[test]
    fn zero_weight_never_pays() {
        let mut b = BasicPoissonBandit::new(vec![0.0, 7.0]).unwrap();
        let mut rng = derive_seed(0, 1, StreamKind::Bandit).rng();
        assert!((0..1000).all(|_| pull(&mut b, 1, &mut rng).reward == 0.0));
    }

    #[test]
    fn weight_seven_matches_cdf() {
        let mut b = BasicPoissonBandit::new(vec![7.0, 1.0, 2.0]).unwrap();
        let mut rng = derive_seed(5, 1, StreamKind::Bandit).rng();
        let n = 100_000;
        let rate = (0..n)
            .map(|_| pull(&mut b, 1, &mut rng).reward)
            .sum::<f64>()
            / n as f64;
        assert!((rate - P_POISSON2_LE6).abs() <= 0.002, "rate {rate}");
        let se = (P_POISSON2_LE6 * (1.0 - P_POISSON2_LE6) / n as f64).sqrt();
        assert!((rate - P_POISSON2_LE6).abs() <= 3.0 * se, "rate {rate}");
    }

    #[test]
    fn optimal_reward_is_realized() {
        let mut b = BasicPoissonBandit::new(vec![1.0, 0.5]).unwrap();
        let mut rng = derive_seed(1, 1, StreamKind::Bandit).rng();
        let outcomes: Vec<f64> = (0..200)
            .map(|_| pull(&mut b, 1, &mut rng).optimal_reward.unwrap())
            .collect();
        assert!(outcomes.iter().all(|&r| r == 0.0 || r == 1.0));
        assert!(outcomes.contains(&0.0) && outcomes.contains(&1.0));
    }

    #[test]
    fn expected_rewards_side_channel() {
        let b = BasicPoissonBandit::new(vec![7.0, 1.0, 0.0]).unwrap();
        let e = b.expected_rewards();
        assert!((e[0] - P_POISSON2_LE6).abs() < 1e-12);
        // scipy.stats.poisson.cdf(0, 2)
        assert!((e[1] - 0.135_335_283_236_612_7).abs() < 1e-12);
        assert_eq!(e[2], 0.0);
    }
}
