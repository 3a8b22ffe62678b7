use std::sync::{Arc, Mutex};

use rand::{Rng, RngCore};

use super::*;
use crate::bandit::{Bandit, BasicBernoulliBandit};
use crate::context::{ActionChoice, ContextSnapshot, RewardOutcome};
use crate::error::ContractError;
use crate::policy::{EpsilonGreedyPolicy, Policy, RandomPolicy};

type Calls = Arc<Mutex<Vec<String>>>;

/// Bandit that logs its calls, skips every third step and ends after `len`.
#[derive(Clone)]
struct MockBandit {
    calls: Calls,
    len: usize,
    fail_at: Option<usize>,
}

impl Bandit for MockBandit {
    fn name(&self) -> &str {
        "Mock"
    }

    fn k(&self) -> usize {
        2
    }

    fn d(&self) -> Option<usize> {
        None
    }

    fn get_context(
        &mut self,
        t: usize,
        _rng: &mut dyn RngCore,
    ) -> Result<Option<ContextSnapshot>, ContractError> {
        self.calls.lock().unwrap().push(format!("get_context {t}"));
        Ok((t <= self.len).then(|| ContextSnapshot::arms_only(2)))
    }

    fn get_reward(
        &mut self,
        t: usize,
        _context: &ContextSnapshot,
        action: &ActionChoice,
        _rng: &mut dyn RngCore,
    ) -> Result<Option<RewardOutcome>, ContractError> {
        self.calls.lock().unwrap().push(format!("get_reward {t}"));
        if self.fail_at == Some(t) {
            return Err(ContractError::ArmOutOfRange { arm: 9, k: 2 });
        }
        Ok((!t.is_multiple_of(3)).then(|| RewardOutcome::reward_only(action.choice as f64)))
    }

    fn clone_box(&self) -> Box<dyn Bandit> {
        Box::new(self.clone())
    }
}

#[derive(Clone)]
struct MockPolicy {
    calls: Calls,
}

impl Policy for MockPolicy {
    fn name(&self) -> &str {
        "MockPolicy"
    }

    fn set_parameters(&mut self, k: usize, _d: Option<usize>) -> Result<(), ContractError> {
        self.calls
            .lock()
            .unwrap()
            .push(format!("set_parameters {k}"));
        Ok(())
    }

    fn get_action(
        &mut self,
        t: usize,
        _context: &ContextSnapshot,
        rng: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        self.calls.lock().unwrap().push(format!("get_action {t}"));
        Ok(ActionChoice::without_propensity(rng.random_range(1..=2)))
    }

    fn set_reward(
        &mut self,
        t: usize,
        _context: &ContextSnapshot,
        _action: &ActionChoice,
        _reward: &RewardOutcome,
    ) -> Result<(), ContractError> {
        self.calls.lock().unwrap().push(format!("set_reward {t}"));
        Ok(())
    }

    fn theta(&self) -> serde_json::Value {
        serde_json::json!({})
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}

fn mock_agent(len: usize, fail_at: Option<usize>) -> (Agent, Calls) {
    let calls: Calls = Arc::default();
    let agent = Agent::new(
        MockPolicy {
            calls: calls.clone(),
        },
        MockBandit {
            calls: calls.clone(),
            len,
            fail_at,
        },
    );
    (agent, calls)
}

fn serial(horizon: usize, simulations: usize) -> SimConfig {
    SimConfig {
        do_parallel: false,
        ..SimConfig::new(horizon, simulations)
    }
}

#[test]
fn four_calls_in_order_with_skips() {
    let (agent, calls) = mock_agent(100, None);
    let out = Simulator::new(vec![agent], serial(4, 1)).unwrap().run();
    assert!(out.is_ok());
    let expected = [
        "set_parameters 2",
        "get_context 1",
        "get_action 1",
        "get_reward 1",
        "set_reward 1",
        "get_context 2",
        "get_action 2",
        "get_reward 2",
        "set_reward 2",
        // Step 3 is skipped: no set_reward, and the policy step stays at 3.
        "get_context 3",
        "get_action 3",
        "get_reward 3",
        "get_context 4",
        "get_action 3",
        "get_reward 4",
        "set_reward 3",
    ];
    assert_eq!(*calls.lock().unwrap(), expected);
    let ts: Vec<usize> = out.history.records().iter().map(|r| r.t).collect();
    assert_eq!(ts, vec![1, 2, 3]);
}

#[test]
fn exhaustion_ends_the_run_normally() {
    let (agent, _) = mock_agent(5, None);
    let out = Simulator::new(vec![agent], serial(50, 2)).unwrap().run();
    assert!(out.is_ok());
    // Steps 1..=5 with step 3 skipped.
    assert_eq!(out.history.len(), 8);
}

#[test]
fn faults_poison_only_their_task() {
    let (bad, _) = mock_agent(100, Some(2));
    let good = Agent::named(
        RandomPolicy::new(),
        BasicBernoulliBandit::new(vec![0.5, 0.5]).unwrap(),
        "good",
    );
    let out = Simulator::new(vec![bad, good], serial(10, 3))
        .unwrap()
        .run();
    assert_eq!(out.faults.len(), 3);
    let f = &out.faults[0];
    assert_eq!((f.agent.as_str(), f.t), ("MockPolicy", 2));
    assert!(f.to_string().contains("simulation"));
    let good_rows = out
        .history
        .records()
        .iter()
        .filter(|r| &*r.agent == "good")
        .count();
    assert_eq!(good_rows, 30);
    // Partial result of the faulted tasks is kept.
    let bad_rows = out
        .history
        .records()
        .iter()
        .filter(|r| &*r.agent == "MockPolicy")
        .count();
    assert_eq!(bad_rows, 3);
    assert!(out.into_result().is_err());
}

#[test]
fn config_validation() {
    let agent = || {
        Agent::new(
            RandomPolicy::new(),
            BasicBernoulliBandit::new(vec![0.5]).unwrap(),
        )
    };
    assert_eq!(
        Simulator::new(vec![], SimConfig::default()).err(),
        Some(ConfigError::NoAgents)
    );
    assert_eq!(
        Simulator::new(vec![agent()], SimConfig::new(0, 1)).err(),
        Some(ConfigError::ZeroHorizon)
    );
    assert_eq!(
        Simulator::new(vec![agent()], SimConfig::new(1, 0)).err(),
        Some(ConfigError::ZeroSimulations)
    );
    assert_eq!(
        Simulator::new(vec![agent(), agent()], SimConfig::new(1, 1)).err(),
        Some(ConfigError::DuplicateAgent("Random".into()))
    );
}

#[test]
fn worker_count_rules() {
    let mut c = SimConfig::new(1, 1);
    c.worker_max = Some(4);
    assert_eq!(worker_count(&c, 100), 4);
    assert_eq!(worker_count(&c, 2), 2);
    c.do_parallel = false;
    assert_eq!(worker_count(&c, 100), 1);
    c.do_parallel = true;
    c.worker_max = None;
    assert!(worker_count(&c, 100) >= 1);
}

#[test]
fn results_do_not_depend_on_workers_or_agent_order() {
    let bandit = || BasicBernoulliBandit::new(vec![0.6, 0.4, 0.2]).unwrap();
    let agents = || {
        vec![
            Agent::new(EpsilonGreedyPolicy::new(0.3).unwrap(), bandit()),
            Agent::new(RandomPolicy::new(), bandit()),
        ]
    };
    let run = |agents: Vec<Agent>, workers: usize| {
        let config = SimConfig {
            worker_max: Some(workers),
            global_seed: 7,
            ..SimConfig::new(30, 20)
        };
        Simulator::new(agents, config)
            .unwrap()
            .run()
            .history
            .to_csv_string()
            .unwrap()
    };
    let one = run(agents(), 1);
    assert_eq!(one, run(agents(), 4));
    let mut reversed = agents();
    reversed.reverse();
    assert_eq!(one, run(reversed, 3));
}

#[test]
fn progress_reports_every_task() {
    let seen = Arc::new(Mutex::new(Vec::new()));
    let sink = seen.clone();
    let agent = Agent::new(
        RandomPolicy::new(),
        BasicBernoulliBandit::new(vec![0.5]).unwrap(),
    );
    Simulator::new(vec![agent], serial(3, 5))
        .unwrap()
        .on_progress(move |p| sink.lock().unwrap().push((p.completed, p.total)))
        .run();
    let seen = seen.lock().unwrap();
    assert_eq!(*seen, (1..=5).map(|c| (c, 5)).collect::<Vec<_>>());
}
