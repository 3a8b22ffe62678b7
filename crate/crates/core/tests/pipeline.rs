use std::sync::Arc;

use armlab::offline::{
    ips_estimate, replay_value, LogFormat, LoggedDataset, LoggedEvent, PropensityBandit,
    ReplayBandit,
};
use armlab::policy::{LinUcbDisjointPolicy, ThompsonSamplingPolicy};
use armlab::{
    aggregate, ActionChoice, Agent, ContextSnapshot, ContractError, HistoryLog, Policy,
    RewardOutcome, SimConfig, SimRng, Simulator,
};
use rand::{Rng, RngCore, SeedableRng};

/// Always plays one arm.
#[derive(Clone)]
struct Fixed(usize);

impl Policy for Fixed {
    fn name(&self) -> &str {
        "Fixed"
    }

    fn set_parameters(&mut self, _k: usize, _d: Option<usize>) -> Result<(), ContractError> {
        Ok(())
    }

    fn get_action(
        &mut self,
        _t: usize,
        _c: &ContextSnapshot,
        _r: &mut dyn RngCore,
    ) -> Result<ActionChoice, ContractError> {
        Ok(ActionChoice::new(self.0, 1.0))
    }

    fn set_reward(
        &mut self,
        _t: usize,
        _c: &ContextSnapshot,
        _a: &ActionChoice,
        _r: &RewardOutcome,
    ) -> Result<(), ContractError> {
        Ok(())
    }

    fn theta(&self) -> serde_json::Value {
        serde_json::Value::Null
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}

/// Uniformly logged events over 4 arms and 2 one-hot features.
fn uniform_log(n: usize, seed: u64) -> LoggedDataset {
    let mut rng = SimRng::seed_from_u64(seed);
    let events = (0..n)
        .map(|_| {
            let f = rng.random_range(0..2);
            let choice = rng.random_range(1..=4);
            let p = if (f + 1) % 4 == choice - 1 { 0.7 } else { 0.2 };
            LoggedEvent {
                choice,
                reward: f64::from(rng.random_bool(p)),
                propensity: Some(0.25),
                context: (0..2).map(|i| f64::from(i == f)).collect(),
            }
        })
        .collect();
    LoggedDataset::new(events, 4, 2).unwrap()
}

fn saved_and_loaded(data: &LoggedDataset) -> Arc<LoggedDataset> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.txt");
    data.save(&path).unwrap();
    let loaded = LoggedDataset::load(&path, LogFormat::new(4, 2).with_propensity()).unwrap();
    assert_eq!(&loaded, data);
    Arc::new(loaded)
}

fn run(agents: Vec<Agent>, config: SimConfig) -> HistoryLog {
    Simulator::new(agents, config)
        .unwrap()
        .run()
        .into_result()
        .unwrap()
}

#[test]
fn replay_of_a_fixed_arm_is_the_mean_of_its_logged_rewards() {
    let data = uniform_log(4000, 5);
    let shared = saved_and_loaded(&data);
    let agents = (1..=4)
        .map(|arm| {
            Agent::named(
                Fixed(arm),
                ReplayBandit::new(shared.clone()),
                format!("arm{arm}"),
            )
        })
        .collect();
    let history = run(agents, SimConfig::new(data.len(), 1));
    for arm in 1..=4 {
        let logged: Vec<f64> = data
            .events()
            .iter()
            .filter(|e| e.choice == arm)
            .map(|e| e.reward)
            .collect();
        let expected = logged.iter().sum::<f64>() / logged.len() as f64;
        let name = format!("arm{arm}");
        let records: Vec<_> = history
            .records()
            .iter()
            .filter(|r| *r.agent == *name)
            .collect();
        assert_eq!(records.len(), logged.len());
        assert_eq!(replay_value(records), Some(expected));
    }
}

#[test]
fn propensity_bandit_total_matches_ips() {
    let data = uniform_log(2000, 9);
    let shared = saved_and_loaded(&data);
    let history = run(
        vec![Agent::new(Fixed(2), PropensityBandit::new(shared))],
        SimConfig::new(data.len(), 1),
    );
    assert_eq!(history.len(), data.len());
    let mean = history.records().iter().map(|r| r.reward).sum::<f64>() / data.len() as f64;
    let ips = ips_estimate(&data, |_| 2).unwrap();
    assert!((mean - ips).abs() < 1e-12, "{mean} vs {ips}");
}

#[test]
fn replay_with_a_learning_policy_is_reindexed_to_a_rectangle() {
    let shared = Arc::new(uniform_log(3000, 11));
    let agents = vec![
        Agent::named(
            LinUcbDisjointPolicy::new(0.3).unwrap(),
            ReplayBandit::new(shared.clone()),
            "linucb",
        ),
        Agent::named(
            ThompsonSamplingPolicy::new(1.0, 1.0).unwrap(),
            ReplayBandit::new(shared),
            "thompson",
        ),
    ];
    let config = SimConfig {
        reindex: true,
        ..SimConfig::new(3000, 3)
    };
    let history = run(agents, config);
    let series = aggregate(&history).unwrap();
    for s in &series {
        assert_eq!(s.sims, 3);
        // Roughly a quarter of the events match.
        assert!(
            (600..=900).contains(&s.horizon()),
            "{}: {}",
            s.agent,
            s.horizon()
        );
        assert!(!s.has_regret());
    }
}

#[test]
fn saved_history_reloads_to_the_same_analytics() {
    let bandit = || {
        armlab::bandit::ContextualBernoulliBandit::new(
            armlab::bandit::WeightMatrix::from_row_major(2, 3, &[0.5, 0.7, 0.1, 0.7, 0.1, 0.3])
                .unwrap(),
        )
        .unwrap()
    };
    let config = SimConfig {
        save_context: true,
        save_theta: true,
        global_seed: 4,
        ..SimConfig::new(30, 20)
    };
    let history = run(
        vec![Agent::new(
            LinUcbDisjointPolicy::new(0.6).unwrap(),
            bandit(),
        )],
        config,
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("history.csv");
    history.save(&path).unwrap();
    let reloaded = HistoryLog::load(&path).unwrap();
    // The file keeps the feature matrix of a context, not the oracle's
    // expected rewards.
    let mut expected = history.records().to_vec();
    for r in &mut expected {
        r.context.as_mut().unwrap().expected_rewards = None;
    }
    assert_eq!(reloaded.records(), expected);
    assert_eq!(aggregate(&reloaded).unwrap(), aggregate(&history).unwrap());
}
