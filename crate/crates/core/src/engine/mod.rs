//! Agents and the simulator that replicates them.

mod agent;
mod simulator;

pub use agent::{Agent, Step, StepOptions};
pub use simulator::{
    worker_count, ConfigError, Progress, SimConfig, SimulationOutcome, Simulator, TaskFault,
};

#[cfg(test)]
mod tests;
