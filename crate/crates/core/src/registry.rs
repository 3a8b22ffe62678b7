//! Construction of bandits and policies from identifiers and parameter maps.
//!
//! Parameters arrive as a JSON object so that any structured config format
//! can feed them. Every problem found is reported, not just the first.

use std::fmt::Write;
use std::path::Path;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::bandit::{
    BasicBernoulliBandit, BasicGaussianBandit, BasicPoissonBandit, ContextualBernoulliBandit,
    GaussianArmSpec, OptimalReward, WeightMatrix,
};
use crate::error::ContractError;
use crate::offline::{LogFormat, LoggedDataset, PropensityBandit, ReplayBandit};
use crate::policy::{
    EpsilonFirstPolicy, EpsilonGreedyAnnealingPolicy, EpsilonGreedyPolicy, LinUcbDisjointPolicy,
    OraclePolicy, RandomPolicy, ThompsonSamplingPolicy, Ucb1Policy,
};
use crate::{Bandit, Policy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Real,
    Integer,
    Boolean,
    Path,
    RealList,
    /// List of rows, or a single flat row.
    RealMatrix,
}

impl ParamKind {
    fn label(self) -> &'static str {
        match self {
            Self::Real => "real",
            Self::Integer => "integer",
            Self::Boolean => "boolean",
            Self::Path => "path",
            Self::RealList => "real list",
            Self::RealMatrix => "real matrix",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub required: bool,
    pub help: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct Entry {
    pub id: &'static str,
    pub help: &'static str,
    pub params: &'static [ParamSpec],
}

const fn req(name: &'static str, kind: ParamKind, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        required: true,
        help,
    }
}

const fn opt(name: &'static str, kind: ParamKind, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        required: false,
        help,
    }
}

use ParamKind::*;

pub const POLICIES: &[Entry] = &[
    Entry {
        id: "epsilon_first",
        help: "explore uniformly for ceil(epsilon * time_steps) steps, then exploit",
        params: &[
            req("epsilon", Real, "exploration fraction in [0,1]"),
            opt(
                "time_steps",
                Integer,
                "N in the budget; defaults to the horizon",
            ),
        ],
    },
    Entry {
        id: "epsilon_greedy",
        help: "explore with probability epsilon, else play the best mean",
        params: &[req("epsilon", Real, "exploration probability in [0,1]")],
    },
    Entry {
        id: "epsilon_greedy_annealing",
        help: "epsilon-greedy with epsilon = 1 / ln(100 t + 0.001)",
        params: &[],
    },
    Entry {
        id: "linucb_disjoint",
        help: "LinUCB with one ridge regression per arm",
        params: &[req("alpha", Real, "exploration width, >= 0")],
    },
    Entry {
        id: "oracle",
        help: "plays the arm with the highest true expected reward",
        params: &[],
    },
    Entry {
        id: "random",
        help: "uniform over active arms",
        params: &[],
    },
    Entry {
        id: "thompson",
        help: "Beta-Bernoulli Thompson sampling",
        params: &[
            opt("alpha0", Real, "prior successes, > 0 (default 1)"),
            opt("beta0", Real, "prior failures, > 0 (default 1)"),
        ],
    },
    Entry {
        id: "ucb1",
        help: "UCB1 upper confidence bound",
        params: &[],
    },
];

pub const BANDITS: &[Entry] = &[
    Entry {
        id: "basic_bernoulli",
        help: "context-free Bernoulli arms",
        params: &[
            req("weights", RealList, "success probability per arm"),
            opt(
                "expected_optimum",
                Boolean,
                "report the best arm's probability, not its draw",
            ),
        ],
    },
    Entry {
        id: "basic_gaussian",
        help: "context-free Gaussian arms",
        params: &[
            req("mu", RealList, "mean per arm"),
            req("sigma", RealList, "standard deviation per arm"),
        ],
    },
    Entry {
        id: "basic_poisson",
        help: "arm a pays 1 when a Poisson(2) draw is below weights[a]",
        params: &[req("weights", RealList, "threshold per arm")],
    },
    Entry {
        id: "contextual_bernoulli",
        help: "one uniformly drawn active feature per step; rows are features, columns arms",
        params: &[
            req("weights", RealMatrix, "d x k success probabilities"),
            opt(
                "expected_optimum",
                Boolean,
                "report the best arm's probability, not its draw",
            ),
        ],
    },
    Entry {
        id: "offline_propensity",
        help: "credits every logged event with 1{match} * reward / propensity",
        params: &[
            req("path", Path, "log file, relative to the config"),
            req("k", Integer, "arm count"),
            req("d", Integer, "feature count"),
            opt("zero_based", Boolean, "actions in the log start at 0"),
        ],
    },
    Entry {
        id: "offline_replay",
        help: "replays a log, crediting only events matching the logged action",
        params: &[
            req("path", Path, "log file, relative to the config"),
            req("k", Integer, "arm count"),
            req("d", Integer, "feature count"),
            opt("has_propensity", Boolean, "column 3 holds propensities"),
            opt("zero_based", Boolean, "actions in the log start at 0"),
        ],
    },
];

/// Registry listing with parameter schemas, in a stable order.
pub fn describe() -> String {
    let mut out = String::new();
    for (title, entries) in [("Bandits", BANDITS), ("Policies", POLICIES)] {
        let _ = writeln!(out, "{title}:");
        for e in entries {
            let _ = writeln!(out, "  {:<26}{}", e.id, e.help);
            for p in e.params {
                let need = if p.required { "required" } else { "optional" };
                let _ = writeln!(
                    out,
                    "      {:<16}{:<12}{:<10}{}",
                    p.name,
                    p.kind.label(),
                    need,
                    p.help
                );
            }
        }
        out.push('\n');
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}

fn entry<'a>(entries: &'a [Entry], what: &str, id: &str) -> Result<&'a Entry, Vec<String>> {
    entries.iter().find(|e| e.id == id).ok_or_else(|| {
        let known: Vec<&str> = entries.iter().map(|e| e.id).collect();
        vec![format!(
            "unknown {what} {id:?} (known: {})",
            known.join(", ")
        )]
    })
}

/// Typed access to a parameter map, collecting errors as it goes.
struct Params<'a> {
    id: &'a str,
    map: &'a Map<String, Value>,
    errors: Vec<String>,
}

impl<'a> Params<'a> {
    fn check(entry: &'a Entry, map: &'a Map<String, Value>) -> Self {
        let mut errors = Vec::new();
        for key in map.keys() {
            if !entry.params.iter().any(|p| p.name == key) {
                errors.push(format!("{}: unknown parameter {key:?}", entry.id));
            }
        }
        for p in entry.params.iter().filter(|p| p.required) {
            if !map.contains_key(p.name) {
                errors.push(format!(
                    "{}: missing required parameter {:?}",
                    entry.id, p.name
                ));
            }
        }
        Self {
            id: entry.id,
            map,
            errors,
        }
    }

    fn bad(&mut self, name: &str, expected: &str) {
        self.errors
            .push(format!("{}: {name} must be {expected}", self.id));
    }

    fn real(&mut self, name: &str) -> Option<f64> {
        let v = self.map.get(name)?;
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.bad(name, "a finite number");
                None
            }
        }
    }

    fn integer(&mut self, name: &str) -> Option<u64> {
        let v = self.map.get(name)?;
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                self.bad(name, "a non-negative integer");
                None
            }
        }
    }

    fn boolean(&mut self, name: &str) -> Option<bool> {
        let v = self.map.get(name)?;
        match v.as_bool() {
            Some(x) => Some(x),
            None => {
                self.bad(name, "true or false");
                None
            }
        }
    }

    fn string(&mut self, name: &str) -> Option<String> {
        let v = self.map.get(name)?;
        match v.as_str() {
            Some(x) => Some(x.to_string()),
            None => {
                self.bad(name, "a string");
                None
            }
        }
    }

    fn reals(v: &Value) -> Option<Vec<f64>> {
        v.as_array()?
            .iter()
            .map(|x| x.as_f64().filter(|x| x.is_finite()))
            .collect()
    }

    fn list(&mut self, name: &str) -> Option<Vec<f64>> {
        let v = self.map.get(name)?;
        match Self::reals(v).filter(|l| !l.is_empty()) {
            Some(l) => Some(l),
            None => {
                self.bad(name, "a non-empty list of numbers");
                None
            }
        }
    }

    fn matrix(&mut self, name: &str) -> Option<(usize, usize, Vec<f64>)> {
        let v = self.map.get(name)?;
        if let Some(row) = Self::reals(v).filter(|l| !l.is_empty()) {
            return Some((1, row.len(), row));
        }
        let rows: Option<Vec<Vec<f64>>> = v
            .as_array()
            .and_then(|rows| rows.iter().map(Self::reals).collect());
        match rows {
            Some(rows)
                if !rows.is_empty()
                    && !rows[0].is_empty()
                    && rows.iter().all(|r| r.len() == rows[0].len()) =>
            {
                let (d, k) = (rows.len(), rows[0].len());
                Some((d, k, rows.concat()))
            }
            _ => {
                self.bad(name, "a list of equally long rows of numbers");
                None
            }
        }
    }

    /// Turns a constructor error into a collected message.
    fn built<T>(&mut self, r: Result<T, ContractError>) -> Option<T> {
        r.map_err(|e| {
            let msg = match e {
                ContractError::InvalidParameter(m) => m,
                other => other.to_string(),
            };
            self.errors.push(format!("{}: {msg}", self.id));
        })
        .ok()
    }

    fn finish<T>(self, value: Option<T>) -> Result<T, Vec<String>> {
        match value {
            Some(v) if self.errors.is_empty() => Ok(v),
            _ if self.errors.is_empty() => Err(vec![format!("{}: invalid parameters", self.id)]),
            _ => Err(self.errors),
        }
    }
}

/// Builds a policy. `horizon` is the default `time_steps` of ε-first.
pub fn build_policy(
    id: &str,
    params: &Map<String, Value>,
    horizon: usize,
) -> Result<Box<dyn Policy>, Vec<String>> {
    let entry = entry(POLICIES, "policy", id)?;
    let mut p = Params::check(entry, params);
    let policy: Option<Box<dyn Policy>> = match id {
        "epsilon_greedy" => p
            .real("epsilon")
            .and_then(|e| p.built(EpsilonGreedyPolicy::new(e)))
            .map(|x| Box::new(x) as _),
        "epsilon_first" => {
            let n = p.integer("time_steps").unwrap_or(horizon as u64);
            p.real("epsilon")
                .and_then(|e| p.built(EpsilonFirstPolicy::new(e, n)))
                .map(|x| Box::new(x) as _)
        }
        "epsilon_greedy_annealing" => Some(Box::new(EpsilonGreedyAnnealingPolicy::new())),
        "linucb_disjoint" => p
            .real("alpha")
            .and_then(|a| p.built(LinUcbDisjointPolicy::new(a)))
            .map(|x| Box::new(x) as _),
        "oracle" => Some(Box::new(OraclePolicy::new())),
        "random" => Some(Box::new(RandomPolicy::new())),
        "thompson" => {
            let a = p.real("alpha0").unwrap_or(1.0);
            let b = p.real("beta0").unwrap_or(1.0);
            p.built(ThompsonSamplingPolicy::new(a, b))
                .map(|x| Box::new(x) as _)
        }
        "ucb1" => Some(Box::new(Ucb1Policy::new())),
        _ => unreachable!("registry entry without constructor: {id}"),
    };
    p.finish(policy)
}

/// Builds a bandit; relative log paths resolve against `base_dir`.
pub fn build_bandit(
    id: &str,
    params: &Map<String, Value>,
    base_dir: &Path,
) -> Result<Box<dyn Bandit>, Vec<String>> {
    let entry = entry(BANDITS, "bandit", id)?;
    let mut p = Params::check(entry, params);
    let optimum = match p.boolean("expected_optimum") {
        Some(true) => OptimalReward::Expected,
        _ => OptimalReward::Realized,
    };
    let bandit: Option<Box<dyn Bandit>> = match id {
        "basic_bernoulli" => p
            .list("weights")
            .and_then(|w| p.built(BasicBernoulliBandit::new(w)))
            .map(|x| Box::new(x.with_optimal_reward(optimum)) as _),
        "basic_gaussian" => match (p.list("mu"), p.list("sigma")) {
            (Some(mu), Some(sigma)) => p
                .built(BasicGaussianBandit::new(GaussianArmSpec { mu, sigma }))
                .map(|x| Box::new(x) as _),
            _ => None,
        },
        "basic_poisson" => p
            .list("weights")
            .and_then(|w| p.built(BasicPoissonBandit::new(w)))
            .map(|x| Box::new(x) as _),
        "contextual_bernoulli" => p
            .matrix("weights")
            .and_then(|(d, k, w)| p.built(WeightMatrix::from_row_major(d, k, &w)))
            .and_then(|w| p.built(ContextualBernoulliBandit::new(w)))
            .map(|x| Box::new(x.with_optimal_reward(optimum)) as _),
        "offline_replay" | "offline_propensity" => {
            let path = p.string("path");
            let k = p.integer("k");
            let d = p.integer("d");
            let format = match (k, d) {
                (Some(0), _) => {
                    p.bad("k", "at least 1");
                    None
                }
                (Some(k), Some(d)) => Some(LogFormat {
                    k: k as usize,
                    d: d as usize,
                    has_propensity: id == "offline_propensity"
                        || p.boolean("has_propensity").unwrap_or(false),
                    zero_based: p.boolean("zero_based").unwrap_or(false),
                }),
                _ => None,
            };
            match (path, format) {
                (Some(path), Some(format)) => {
                    let full = base_dir.join(&path);
                    match LoggedDataset::load(&full, format) {
                        Ok(data) => {
                            let data = Arc::new(data);
                            if id == "offline_replay" {
                                Some(Box::new(ReplayBandit::new(data)) as _)
                            } else {
                                Some(Box::new(PropensityBandit::new(data)) as _)
                            }
                        }
                        Err(e) => {
                            p.errors
                                .push(format!("{id}: cannot load {}: {e}", full.display()));
                            None
                        }
                    }
                }
                _ => None,
            }
        }
        _ => unreachable!("registry entry without constructor: {id}"),
    };
    p.finish(bandit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn map(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn listing_is_stable_and_complete() {
        let text = describe();
        assert_eq!(text, describe());
        assert!(text.contains("linucb_disjoint"));
        let replay = text.split("offline_replay").nth(1).unwrap();
        for name in ["path", "k", "d"] {
            assert!(replay
                .lines()
                .any(|l| l.trim_start().starts_with(name) && l.contains("required")));
        }
        let ids: Vec<&str> = POLICIES.iter().map(|e| e.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn builds_every_policy() {
        let cases = [
            ("epsilon_greedy", json!({"epsilon": 0.1}), "EpsilonGreedy"),
            (
                "epsilon_first",
                json!({"epsilon": 0.25, "time_steps": 400}),
                "EpsilonFirst",
            ),
            (
                "epsilon_greedy_annealing",
                json!({}),
                "EpsilonGreedyAnnealing",
            ),
            ("linucb_disjoint", json!({"alpha": 0.6}), "LinUCBDisjoint"),
            ("oracle", json!({}), "Oracle"),
            ("random", json!({}), "Random"),
            (
                "thompson",
                json!({"alpha0": 1, "beta0": 1}),
                "ThompsonSampling",
            ),
            ("ucb1", json!({}), "UCB1"),
        ];
        for (id, params, name) in cases {
            let policy = build_policy(id, &map(params), 100).unwrap();
            assert_eq!(policy.name(), name);
        }
    }

    #[test]
    fn collects_all_parameter_errors() {
        let errs = build_policy(
            "epsilon_greedy",
            &map(json!({"epsilon": 1.5, "eps": 1})),
            10,
        )
        .unwrap_err();
        assert_eq!(errs.len(), 2, "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("epsilon out of [0,1]")));
        assert!(errs.iter().any(|e| e.contains("unknown parameter \"eps\"")));
        let errs = build_policy("linucb_disjoint", &map(json!({})), 10).unwrap_err();
        assert!(errs[0].contains("missing required parameter \"alpha\""));
        assert!(build_policy("nope", &Map::new(), 10).unwrap_err()[0].contains("unknown policy"));
    }

    #[test]
    fn builds_bandits() {
        let dir = Path::new(".");
        let b = build_bandit(
            "contextual_bernoulli",
            &map(json!({"weights": [[0.5, 0.7, 0.1], [0.7, 0.1, 0.3]]})),
            dir,
        )
        .unwrap();
        assert_eq!((b.k(), b.d()), (3, Some(2)));
        let b = build_bandit(
            "contextual_bernoulli",
            &map(json!({"weights": [0.5, 0.2, 0.1]})),
            dir,
        )
        .unwrap();
        assert_eq!((b.k(), b.d()), (3, Some(1)));
        let b = build_bandit(
            "basic_gaussian",
            &map(json!({"mu": [0, 1], "sigma": [1, 1]})),
            dir,
        )
        .unwrap();
        assert_eq!(b.k(), 2);
        assert!(build_bandit(
            "contextual_bernoulli",
            &map(json!({"weights": [[0.5], [0.1, 0.2]]})),
            dir
        )
        .is_err());
        assert!(build_bandit("basic_bernoulli", &map(json!({"weights": [1.5]})), dir).is_err());
    }

    #[test]
    fn offline_bandits_load_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("log.txt"), "1 1 0.5 0.25\n2 0 0.5 0.75\n").unwrap();
        let b = build_bandit(
            "offline_propensity",
            &map(json!({"path": "log.txt", "k": 2, "d": 1})),
            dir.path(),
        )
        .unwrap();
        assert_eq!(b.k(), 2);
        let b = build_bandit(
            "offline_replay",
            &map(json!({"path": "log.txt", "k": 2, "d": 1, "has_propensity": true})),
            dir.path(),
        )
        .unwrap();
        assert_eq!(b.d(), Some(1));
        let errs = build_bandit(
            "offline_replay",
            &map(json!({"path": "missing.txt", "k": 2, "d": 1})),
            dir.path(),
        )
        .unwrap_err();
        assert!(errs[0].contains("cannot load"), "{errs:?}");
    }
}
