//! Fixtures shared by the benchmarks in `benches/`.

use armlab::bandit::{ContextualBernoulliBandit, WeightMatrix};
use armlab::policy::{EpsilonGreedyPolicy, LinUcbDisjointPolicy};
use armlab::{Agent, SimConfig};

/// `d × k` weights where feature `f` favours arm `f mod k`.
pub fn diagonal_bandit(d: usize, k: usize) -> ContextualBernoulliBandit {
    let values: Vec<f64> = (0..d * k)
        .map(|i| if i / k % k == i % k { 0.6 } else { 0.2 })
        .collect();
    ContextualBernoulliBandit::new(WeightMatrix::from_row_major(d, k, &values).unwrap()).unwrap()
}

/// One ε-greedy and one LinUCB agent on the same `d × k` bandit.
pub fn agents(d: usize, k: usize) -> Vec<Agent> {
    vec![
        Agent::named(
            EpsilonGreedyPolicy::new(0.1).unwrap(),
            diagonal_bandit(d, k),
            "egreedy",
        ),
        Agent::named(
            LinUcbDisjointPolicy::new(0.6).unwrap(),
            diagonal_bandit(d, k),
            "linucb",
        ),
    ]
}

pub fn serial(horizon: usize, simulations: usize) -> SimConfig {
    SimConfig {
        do_parallel: false,
        ..SimConfig::new(horizon, simulations)
    }
}
