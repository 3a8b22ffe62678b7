//! Simulation and offline evaluation of multi-armed and contextual bandit
//! policies.
//!
//! Every simulated interaction follows the same four calls:
//!
//! 1. [`Bandit::get_context`] reveals the context for step `t`,
//! 2. [`Policy::get_action`] picks an arm,
//! 3. [`Bandit::get_reward`] answers with the reward of that arm,
//! 4. [`Policy::set_reward`] updates the policy's parameters.
//!
//! An [`Agent`] binds one policy to one bandit, a [`Simulator`] replays
//! agents over many seeded simulations (in parallel), and the resulting
//! [`HistoryLog`] feeds the [`analytics`] module. Logged interaction data can
//! be replayed through the bandits in [`offline`].
//!
//! Arm indices are 1-based throughout the public API, as in the exported
//! history files.

pub mod analytics;
pub mod bandit;
pub mod context;
pub mod engine;
pub mod error;
pub mod history;
pub mod offline;
pub mod policy;
pub mod registry;
pub mod rng;

pub use analytics::{aggregate, summarize, AggregateSeries, Stat};
pub use bandit::Bandit;
pub use context::{get_arm_context, which_max_tied, ActionChoice, ContextSnapshot, RewardOutcome};
pub use engine::{Agent, SimConfig, SimulationOutcome, Simulator, Step, TaskFault};
pub use error::ContractError;
pub use history::{HistoryLog, StepRecord};
pub use policy::Policy;
pub use rng::{derive_seed, SimRng, StreamKind, StreamSeed};
