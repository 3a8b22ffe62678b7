use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::RngCore;
use serde_json::json;

use super::{require_sized, Policy};
use crate::context::{
    get_arm_context, which_max_tied_among, ActionChoice, ContextSnapshot, RewardOutcome,
};
use crate::error::ContractError;

/// Ridge accumulators of one arm: `A = I + Σ x xᵀ`, `b = Σ r x`.
#[derive(Debug, Clone)]
pub struct LinUcbArmState {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl LinUcbArmState {
    pub fn new(d: usize) -> Self {
        Self {
            a: DMatrix::identity(d, d),
            b: DVector::zeros(d),
            factor: None,
        }
    }

    pub fn d(&self) -> usize {
        self.b.len()
    }

    /// Rank-one update with feature vector `x` and reward `r`.
    pub fn update(&mut self, x: &DVector<f64>, r: f64) -> Result<(), ContractError> {
        self.check_dim(x)?;
        self.a += x * x.transpose();
        self.b += x * r;
        self.factor = None;
        Ok(())
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<(), ContractError> {
        if x.len() != self.d() {
            return Err(ContractError::DimensionMismatch {
                expected: self.d(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn factor(&mut self, arm: usize) -> Result<&Cholesky<f64, Dyn>, ContractError> {
        if self.factor.is_none() {
            let chol = self
                .a
                .clone()
                .cholesky()
                .ok_or(ContractError::NotPositiveDefinite { arm })?;
            self.factor = Some(chol);
        }
        Ok(self.factor.as_ref().expect("factor computed above"))
    }

    /// Ridge estimate `A⁻¹ b`.
    pub fn theta_hat(&mut self, arm: usize) -> Result<DVector<f64>, ContractError> {
        let b = self.b.clone();
        Ok(self.factor(arm)?.solve(&b))
    }

    /// Upper confidence bound `θ̂ᵀx + alpha * sqrt(xᵀ A⁻¹ x)`.
    pub fn upper_bound(
        &mut self,
        arm: usize,
        x: &DVector<f64>,
        alpha: f64,
    ) -> Result<f64, ContractError> {
        self.check_dim(x)?;
        let theta = self.theta_hat(arm)?;
        let a_inv_x = self.factor(arm)?.solve(x);
        let width = x.dot(&a_inv_x).max(0.0).sqrt();
        Ok(theta.dot(x) + alpha * width)
    }
}

/// LinUCB with one independent ridge regression per arm.
#[derive(Debug, Clone)]
pub struct LinUcbDisjointPolicy {
    alpha: f64,
    arms: Vec<LinUcbArmState>,
}

impl LinUcbDisjointPolicy {
    pub fn new(alpha: f64) -> Result<Self, ContractError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(ContractError::InvalidParameter(format!(
                "alpha {alpha} must be non-negative"
            )));
        }
        Ok(Self {
            alpha,
            arms: Vec::new(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn arms(&self) -> &[LinUcbArmState] {
        &self.arms
    }

    pub fn arm_mut(&mut self, arm: usize) -> &mut LinUcbArmState {
        &mut self.arms[arm - 1]
    }

    /// Upper confidence bound of every arm under `context` (1-based order).
    pub fn upper_bounds(&mut self, context: &ContextSnapshot) -> Result<Vec<f64>, ContractError> {
        require_sized(self.arms.len(), context)?;
        let alpha = self.alpha;
        let mut p = vec![f64::NEG_INFINITY; self.arms.len()];
        for arm in context.active_arms() {
            let x = get_arm_context(context, arm)?;
            p[arm - 1] = self.arms[arm - 1].upper_bound(arm, &x, alpha)?;
        }
        Ok(p)
    }
}

impl Policy for LinUcbDisjointPolicy {
    fn name(&self) -> &str {
        "LinUCBDisjoint"
    }

    fn set_parameters(&mut self, k: usize, d: Option<usize>) -> Result<(), ContractError> {
        let d = d.ok_or(ContractError::MissingDimension)?;
        self.arms = vec![LinUcbArmState::new(d); k];
        Ok(())
    }

    fn get_action(
        &mut self,
        _t: usize,
        context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        let p = self.upper_bounds(context)?;
        let arm = which_max_tied_among(&p, &context.active_arms(), rng)?;
        Ok(ActionChoice::new(arm, 1.0))
    }

    fn set_reward(
        &mut self,
        _t: usize,
        context: &ContextSnapshot,
        action: &ActionChoice,
        reward: &RewardOutcome,
    ) -> Result<(), ContractError> {
        crate::context::check_arm(action.choice, self.arms.len())?;
        let x = get_arm_context(context, action.choice)?;
        self.arms[action.choice - 1].update(&x, reward.reward)
    }

    fn theta(&self) -> serde_json::Value {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        json!({
            "A": self.arms.iter().map(|s| rows(&s.a)).collect::<Vec<_>>(),
            "b": self.arms.iter().map(|s| s.b.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
