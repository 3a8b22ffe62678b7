//! Step-level log of a simulation run.

mod csv_io;
mod float;

pub use csv_io::HistoryError;
pub use float::fmt_g17;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::context::ContextSnapshot;

/// One credited step of one agent in one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub agent: Arc<str>,
    /// Simulation index, 1-based.
    pub sim: usize,
    /// Credited-step counter of the agent's policy, 1-based.
    pub t: usize,
    /// Chosen arm, 1-based.
    pub choice: usize,
    pub reward: f64,
    pub optimal_reward: Option<f64>,
    pub optimal_arm: Option<usize>,
    pub propensity: Option<f64>,
    pub context: Option<Box<ContextSnapshot>>,
    pub theta: Option<Box<serde_json::Value>>,
}

impl StepRecord {
    /// `optimal_reward - reward`, when the optimum is known.
    pub fn regret(&self) -> Option<f64> {
        self.optimal_reward.map(|o| o - self.reward)
    }
}

/// All records of a run, plus the arm count each agent played against.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoryLog {
    records: Vec<StepRecord>,
    arms: BTreeMap<String, usize>,
}

impl HistoryLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<StepRecord>) -> Self {
        let mut log = Self {
            records,
            arms: BTreeMap::new(),
        };
        log.sort_canonical();
        log
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: StepRecord) {
        self.records.push(record);
    }

    pub fn reserve(&mut self, additional: usize) {
        self.records.reserve_exact(additional);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = StepRecord>) {
        self.records.extend(records);
    }

    /// Declares that `agent` played against `k` arms.
    pub fn set_arm_count(&mut self, agent: &str, k: usize) {
        self.arms.insert(agent.to_string(), k);
    }

    /// Arm count of `agent`: the declared one, else the highest arm seen.
    pub fn arm_count(&self, agent: &str) -> usize {
        self.arms.get(agent).copied().unwrap_or_else(|| {
            self.records
                .iter()
                .filter(|r| &*r.agent == agent)
                .map(|r| r.choice)
                .max()
                .unwrap_or(0)
        })
    }

    /// Agent names in sorted order.
    pub fn agents(&self) -> Vec<String> {
        let mut names: Vec<String> = self.records.iter().map(|r| r.agent.to_string()).collect();
        names.extend(self.arms.keys().cloned());
        names.sort();
        names.dedup();
        names
    }

    /// Sorts by `(agent, sim, t)`.
    pub fn sort_canonical(&mut self) {
        if self.records.is_sorted_by_key(|r| (&*r.agent, r.sim, r.t)) {
            return;
        }
        // Keys are unique; unstable sort needs no scratch buffer.
        self.records
            .sort_unstable_by(|a, b| (&*a.agent, a.sim, a.t).cmp(&(&*b.agent, b.sim, b.t)));
    }

    /// Renumbers `t` consecutively within each `(agent, sim)` run and
    /// truncates every run of an agent to that agent's shortest run.
    pub fn reindex(&mut self) {
        self.sort_canonical();
        let mut lengths: HashMap<(Arc<str>, usize), usize> = HashMap::new();
        for r in &mut self.records {
            let n = lengths.entry((r.agent.clone(), r.sim)).or_insert(0);
            *n += 1;
            r.t = *n;
        }
        let mut shortest: HashMap<Arc<str>, usize> = HashMap::new();
        for ((agent, _), n) in &lengths {
            let e = shortest.entry(agent.clone()).or_insert(*n);
            *e = (*e).min(*n);
        }
        self.records.retain(|r| r.t <= shortest[&r.agent]);
    }

    /// Records of `agent`, grouped per simulation in ascending order.
    pub fn runs(&self, agent: &str) -> BTreeMap<usize, Vec<&StepRecord>> {
        let mut runs: BTreeMap<usize, Vec<&StepRecord>> = BTreeMap::new();
        for r in self.records.iter().filter(|r| &*r.agent == agent) {
            runs.entry(r.sim).or_default().push(r);
        }
        for run in runs.values_mut() {
            run.sort_by_key(|r| r.t);
        }
        runs
    }
}
