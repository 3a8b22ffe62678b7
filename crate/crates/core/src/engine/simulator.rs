use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use super::agent::{Agent, Step, StepOptions};
use crate::error::ContractError;
use crate::history::{HistoryLog, StepRecord};
use crate::rng::{derive_seed, StreamKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Steps per simulation.
    pub horizon: usize,
    /// Replications per agent.
    pub simulations: usize,
    pub global_seed: u64,
    pub save_context: bool,
    pub save_theta: bool,
    pub do_parallel: bool,
    pub worker_max: Option<usize>,
    /// Renumber and truncate runs after a run with skipping bandits.
    pub reindex: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 100,
            simulations: 100,
            global_seed: 0,
            save_context: false,
            save_theta: false,
            do_parallel: true,
            worker_max: None,
            reindex: false,
        }
    }
}

impl SimConfig {
    pub fn new(horizon: usize, simulations: usize) -> Self {
        Self {
            horizon,
            simulations,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("at least one agent is required")]
    NoAgents,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("simulations must be at least 1")]
    ZeroSimulations,
    #[error("agent name {0:?} is used twice")]
    DuplicateAgent(String),
}

/// A contract violation that stopped one `(agent, sim)` task.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("agent {agent:?}, simulation {sim}, step {t}: {error}")]
pub struct TaskFault {
    pub agent: String,
    pub sim: usize,
    /// Agent step at which the fault happened; 0 during initialization.
    pub t: usize,
    pub error: ContractError,
}

/// Completion notice for one `(agent, sim)` task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Progress {
    pub completed: usize,
    pub total: usize,
    pub agent: String,
    pub sim: usize,
}

type ProgressFn = dyn Fn(&Progress) + Send + Sync;

/// History of the tasks that ran plus the faults of those that did not
/// finish.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub history: HistoryLog,
    pub faults: Vec<TaskFault>,
}

impl SimulationOutcome {
    pub fn is_ok(&self) -> bool {
        self.faults.is_empty()
    }

    /// The history, or the fault list if any task faulted.
    pub fn into_result(self) -> Result<HistoryLog, Vec<TaskFault>> {
        if self.faults.is_empty() {
            Ok(self.history)
        } else {
            Err(self.faults)
        }
    }
}

/// Workers used for `tasks` tasks: one when parallelism is off, otherwise
/// `worker_max` if set, else one less than the available cores (at least
/// one); never more than the task count.
pub fn worker_count(config: &SimConfig, tasks: usize) -> usize {
    if !config.do_parallel {
        return 1;
    }
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let default = available.saturating_sub(1).max(1);
    config.worker_max.unwrap_or(default).min(tasks).max(1)
}

/// Runs every agent for `simulations` independent replications.
pub struct Simulator {
    agents: Vec<Agent>,
    config: SimConfig,
    progress: Option<Arc<ProgressFn>>,
}

impl Simulator {
    pub fn new(agents: Vec<Agent>, config: SimConfig) -> Result<Self, ConfigError> {
        if agents.is_empty() {
            return Err(ConfigError::NoAgents);
        }
        if config.horizon == 0 {
            return Err(ConfigError::ZeroHorizon);
        }
        if config.simulations == 0 {
            return Err(ConfigError::ZeroSimulations);
        }
        let mut names: Vec<&str> = agents.iter().map(Agent::name).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(ConfigError::DuplicateAgent(w[0].to_string()));
        }
        Ok(Self {
            agents,
            config,
            progress: None,
        })
    }

    /// Calls `f` each time an `(agent, sim)` task completes.
    pub fn on_progress(mut self, f: impl Fn(&Progress) + Send + Sync + 'static) -> Self {
        self.progress = Some(Arc::new(f));
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn run(&self) -> SimulationOutcome {
        // Agent-major in name order, so concatenated task output is already
        // in canonical order.
        let mut order: Vec<usize> = (0..self.agents.len()).collect();
        order.sort_by(|&a, &b| self.agents[a].name().cmp(self.agents[b].name()));
        let tasks: Vec<(usize, usize)> = order
            .iter()
            .flat_map(|&a| (1..=self.config.simulations).map(move |s| (a, s)))
            .collect();
        let total = tasks.len();
        let completed = AtomicUsize::new(0);

        let run_one = |&(a, sim): &(usize, usize)| {
            let result = self.run_task(&self.agents[a], sim);
            let done = completed.fetch_add(1, Ordering::Relaxed) + 1;
            if let Some(progress) = &self.progress {
                progress(&Progress {
                    completed: done,
                    total,
                    agent: self.agents[a].name().to_string(),
                    sim,
                });
            }
            log::debug!(
                "task {done}/{total}: agent {} sim {sim}",
                self.agents[a].name()
            );
            result
        };

        let workers = worker_count(&self.config, total);
        let results: Vec<(Vec<StepRecord>, Option<TaskFault>)> = if workers <= 1 {
            tasks.iter().map(run_one).collect()
        } else {
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => pool.install(|| tasks.par_iter().map(run_one).collect()),
                Err(e) => {
                    log::warn!("falling back to a single worker: {e}");
                    tasks.iter().map(run_one).collect()
                }
            }
        };

        let mut history = HistoryLog::new();
        for agent in &self.agents {
            history.set_arm_count(agent.name(), agent.bandit().k());
        }
        history.reserve(results.iter().map(|(r, _)| r.len()).sum());
        let mut faults = Vec::new();
        for (records, fault) in results {
            history.extend(records);
            faults.extend(fault);
        }
        history.sort_canonical();
        if self.config.reindex {
            history.reindex();
        }
        SimulationOutcome { history, faults }
    }

    fn run_task(&self, template: &Agent, sim: usize) -> (Vec<StepRecord>, Option<TaskFault>) {
        let mut agent = template.clone();
        let mut rng_bandit = derive_seed(self.config.global_seed, sim, StreamKind::Bandit).rng();
        let mut rng_policy = derive_seed(self.config.global_seed, sim, StreamKind::Policy).rng();
        let fault = |t: usize, error: ContractError| TaskFault {
            agent: template.name().to_string(),
            sim,
            t,
            error,
        };

        if let Err(e) = agent.initialize(self.config.horizon, &mut rng_bandit) {
            return (Vec::new(), Some(fault(0, e)));
        }
        let options = StepOptions {
            sim,
            save_context: self.config.save_context,
            save_theta: self.config.save_theta,
        };
        let mut records = Vec::with_capacity(self.config.horizon);
        for _ in 0..self.config.horizon {
            match agent.do_step(&mut rng_bandit, &mut rng_policy, options) {
                Ok(Step::Record(r)) => records.push(r),
                Ok(Step::Skipped) => {}
                Ok(Step::Exhausted) => break,
                Err(e) => return (records, Some(fault(agent.agent_t(), e))),
            }
        }
        (records, None)
    }
}
