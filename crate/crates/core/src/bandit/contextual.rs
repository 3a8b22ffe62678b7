use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use super::{bernoulli_draws, Bandit, OptimalReward, WeightMatrix};
use crate::context::{check_arm, which_max_tied, ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;

/// Weight-based contextual Bernoulli bandit.
///
/// Each step one of the `d` binary features is active, chosen uniformly.
/// The context is that one-hot vector repeated in every arm column, and arm
/// `a` pays 1 with probability `W[active, a]`. With a single row this is a
/// plain context-free Bernoulli bandit whose context is a row of ones.
/// `optimal_reward` follows [`OptimalReward`], realized by default.
#[derive(Debug, Clone)]
pub struct ContextualBernoulliBandit {
    weights: WeightMatrix,
    optimum: OptimalReward,
}

impl ContextualBernoulliBandit {
    pub fn new(weights: WeightMatrix) -> Result<Self, ContractError> {
        Ok(Self {
            weights: weights.ensure_probabilities()?,
            optimum: OptimalReward::default(),
        })
    }

    pub fn with_optimal_reward(mut self, optimum: OptimalReward) -> Self {
        self.optimum = optimum;
        self
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    /// Expected reward per arm under the feature vector in column 1 of `X`.
    fn active_weights(&self, context: &ContextSnapshot) -> Result<Vec<f64>, ContractError> {
        let x = context.x.as_ref().ok_or(ContractError::MissingFeatures)?;
        if x.nrows() != self.weights.d() {
            return Err(ContractError::DimensionMismatch {
                expected: self.weights.d(),
                got: x.nrows(),
            });
        }
        let features = x.column(0);
        Ok((features.transpose() * self.weights.matrix())
            .iter()
            .copied()
            .collect())
    }
}

impl Bandit for ContextualBernoulliBandit {
    fn name(&self) -> &str {
        "ContextualBernoulliBandit"
    }

    fn k(&self) -> usize {
        self.weights.k()
    }

    fn d(&self) -> Option<usize> {
        Some(self.weights.d())
    }

    fn get_context(
        &mut self,
        _t: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Option<ContextSnapshot>, ContractError> {
        let (d, k) = (self.weights.d(), self.weights.k());
        let active = rng.random_range(0..d);
        let x = DMatrix::from_fn(d, k, |i, _| if i == active { 1.0 } else { 0.0 });
        Ok(Some(
            ContextSnapshot::with_features(x).with_expected_rewards(self.weights.row(active)),
        ))
    }

    fn get_reward(
        &mut self,
        _t: usize,
        context: &ContextSnapshot,
        action: &ActionChoice,
        rng: &mut dyn RngCore,
    ) -> Result<Option<RewardOutcome>, ContractError> {
        check_arm(action.choice, self.k())?;
        let w = self.active_weights(context)?;
        let rewards = bernoulli_draws(&w, rng);
        let optimal_arm = which_max_tied(&w, rng)?;
        Ok(Some(RewardOutcome {
            reward: rewards[action.choice - 1],
            optimal_reward: Some(self.optimum.value(&rewards, &w, optimal_arm)),
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

    fn bandit(d: usize, k: usize, w: &[f64]) -> ContextualBernoulliBandit {
        ContextualBernoulliBandit::new(WeightMatrix::from_row_major(d, k, w).unwrap()).unwrap()
    }

    fn active_feature(ctx: &ContextSnapshot) -> usize {
        let x = ctx.x.as_ref().unwrap();
        (0..x.nrows()).find(|&i| x[(i, 0)] != 0.0).unwrap() + 1
    }

    #[test]
    fn single_feature_is_all_ones() {
        let mut b = bandit(1, 3, &[0.5, 0.2, 0.1]);
        let mut rng = derive_seed(0, 1, StreamKind::Bandit).rng();
        for t in 1..20 {
            let ctx = b.get_context(t, &mut rng).unwrap().unwrap();
            assert_eq!(ctx.x.unwrap(), DMatrix::from_element(1, 3, 1.0));
            assert_eq!((ctx.k, ctx.d), (3, Some(1)));
        }
    }

    #[test]
    fn one_hot_recycled_columns() {
        let mut b = bandit(3, 3, &[0.6, 0.2, 0.2, 0.2, 0.6, 0.2, 0.2, 0.2, 0.6]);
        let mut rng = derive_seed(0, 1, StreamKind::Bandit).rng();
        for t in 1..200 {
            let ctx = b.get_context(t, &mut rng).unwrap().unwrap();
            let x = ctx.x.unwrap();
            for col in 0..3 {
                assert_eq!(x.column(col), x.column(0));
            }
            assert_eq!(x.column(0).iter().filter(|&&v| v != 0.0).count(), 1);
            assert_eq!(x.column(0).sum(), 1.0);
        }
    }

    #[test]
    fn feature_frequency_is_uniform() {
        let mut b = bandit(2, 3, &[0.5, 0.7, 0.1, 0.7, 0.1, 0.3]);
        let mut rng = derive_seed(4, 2, StreamKind::Bandit).rng();
        let n = 10_000;
        let first = (0..n)
            .filter(|&t| active_feature(&b.get_context(t, &mut rng).unwrap().unwrap()) == 1)
            .count();
        let freq = first as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.015, "freq {freq}");
    }

    #[test]
    fn optimal_arm_of_active_row() {
        let mut b = bandit(1, 3, &[0.6, 0.2, 0.2]).with_optimal_reward(OptimalReward::Expected);
        let mut rng = derive_seed(0, 1, StreamKind::Bandit).rng();
        let ctx = b.get_context(1, &mut rng).unwrap().unwrap();
        let r = b
            .get_reward(1, &ctx, &ActionChoice::without_propensity(1), &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(r.optimal_arm, Some(1));
        assert_eq!(r.optimal_reward, Some(0.6));
    }

    #[test]
    fn realized_optimum_is_the_best_arms_draw() {
        let mut b = bandit(2, 3, &[0.5, 0.7, 0.1, 0.7, 0.1, 0.3]);
        let mut rng = derive_seed(4, 1, StreamKind::Bandit).rng();
        let mut pays = 0.0;
        for t in 1..=2000 {
            let ctx = b.get_context(t, &mut rng).unwrap().unwrap();
            let optimal = which_max_tied(ctx.expected_rewards.as_ref().unwrap(), &mut rng).unwrap();
            let r = b
                .get_reward(
                    t,
                    &ctx,
                    &ActionChoice::without_propensity(optimal),
                    &mut rng,
                )
                .unwrap()
                .unwrap();
            assert_eq!(r.optimal_arm, Some(optimal));
            assert_eq!(r.optimal_reward, Some(r.reward));
            pays += r.reward;
        }
        assert!((pays / 2000.0 - 0.7).abs() < 0.04);
    }

    #[test]
    fn certain_rewards_with_tied_optimum() {
        let mut b = bandit(1, 2, &[1.0, 1.0]);
        let mut rng = derive_seed(0, 1, StreamKind::Bandit).rng();
        let mut first = 0;
        let n = 4000;
        for t in 0..n {
            let ctx = b.get_context(t, &mut rng).unwrap().unwrap();
            let r = b
                .get_reward(
                    t,
                    &ctx,
                    &ActionChoice::without_propensity(1 + t % 2),
                    &mut rng,
                )
                .unwrap()
                .unwrap();
            assert_eq!(r.reward, 1.0);
            if r.optimal_arm == Some(1) {
                first += 1;
            }
        }
        let freq = first as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.04, "freq {freq}");
    }

    #[test]
    fn averaged_arm_value_is_one_third() {
        let mut b = bandit(3, 3, &[0.6, 0.2, 0.2, 0.2, 0.6, 0.2, 0.2, 0.2, 0.6]);
        let mut rng = derive_seed(8, 1, StreamKind::Bandit).rng();
        let n = 100_000;
        let mut total = 0.0;
        for t in 0..n {
            let ctx = b.get_context(t, &mut rng).unwrap().unwrap();
            total += b
                .get_reward(t, &ctx, &ActionChoice::without_propensity(2), &mut rng)
                .unwrap()
                .unwrap()
                .reward;
        }
        let mean = total / n as f64;
        assert!((mean - 1.0 / 3.0).abs() <= 0.01, "mean {mean}");
    }

    #[test]
    fn conditional_rates_converge_to_weights() {
        let w = [0.5, 0.7, 0.1, 0.7, 0.1, 0.3];
        let mut b = bandit(2, 3, &w);
        let mut rng = derive_seed(21, 1, StreamKind::Bandit).rng();
        let mut hits = [[0.0f64; 3]; 2];
        let mut seen = [[0.0f64; 3]; 2];
        for t in 0..100_000usize {
            let ctx = b.get_context(t, &mut rng).unwrap().unwrap();
            let f = active_feature(&ctx) - 1;
            let arm = t % 3 + 1;
            let r = b
                .get_reward(t, &ctx, &ActionChoice::without_propensity(arm), &mut rng)
                .unwrap()
                .unwrap();
            hits[f][arm - 1] += r.reward;
            seen[f][arm - 1] += 1.0;
        }
        for f in 0..2 {
            for a in 0..3 {
                let p = w[f * 3 + a];
                let rate = hits[f][a] / seen[f][a];
                let se = (p * (1.0 - p) / seen[f][a]).sqrt();
                assert!((rate - p).abs() <= 3.0 * se, "f{f} a{a}: {rate} vs {p}");
            }
        }
    }
}
