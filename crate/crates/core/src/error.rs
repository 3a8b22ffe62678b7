use thiserror::Error;

/// A violation of the bandit/policy interaction contract.
///
/// Raised from inside a single step; the engine wraps it into a
/// [`TaskFault`](crate::TaskFault) carrying the agent, simulation and step.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractError {
    #[error("arm {arm} is outside 1..={k}")]
    ArmOutOfRange { arm: usize, k: usize },
    #[error("arm {arm} is not among the active arms")]
    InactiveArm { arm: usize },
    #[error("context carries no feature matrix")]
    MissingFeatures,
    #[error("policy requires the feature dimension d")]
    MissingDimension,
    #[error("bandit does not support oracle")]
    NoExpectedRewards,
    #[error("non-finite value {0} where a finite real is required")]
    NonFinite(f64),
    #[error("cannot take the maximum of an empty vector")]
    Empty,
    #[error("reward {0} is not binary")]
    NonBinaryReward(f64),
    #[error("propensity {0} is outside (0, 1]")]
    InvalidPropensity(f64),
    #[error("logged event {0} has no propensity")]
    MissingPropensity(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ridge accumulator of arm {arm} is not positive definite")]
    NotPositiveDefinite { arm: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
