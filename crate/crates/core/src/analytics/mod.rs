//! Statistics across simulations: per-step and cumulative series, the text
//! summary, and plot tables.

mod plot;
mod summary;
mod svg;

pub use plot::{
    conditional_arm_share, plot_table, Dispersion, PlotKind, PlotOptions, PlotRow, PlotTable,
};
pub use summary::{fmt_sig7, summarize};
pub use svg::render_svg;

use thiserror::Error;

use crate::history::{HistoryLog, StepRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("history is empty")]
    Empty,
    #[error(
        "runs of agent {agent:?} are ragged (lengths {min} to {max}, or gaps in t); reindex the history first"
    )]
    Ragged {
        agent: String,
        min: usize,
        max: usize,
    },
    #[error("limit_context needs a history saved with contexts")]
    NoContexts,
    #[error("context feature {feature} does not exist (d = {d})")]
    NoSuchFeature { feature: usize, d: usize },
    #[error("unknown agent {0:?}")]
    UnknownAgent(String),
}

/// Sample statistics of one quantity across simulations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    /// Sample variance (n − 1 denominator); 0 for a single sample.
    pub var: f64,
    pub sd: f64,
    /// Standard error of the mean.
    pub se: f64,
    /// Normal-approximation 95% confidence half-width, `1.96 · se`.
    pub ci95: f64,
    pub n: usize,
}

impl Stat {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut acc = Welford::default();
        samples.iter().for_each(|&v| acc.push(v));
        acc.stat()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn stat(&self) -> Stat {
        let var = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        let sd = var.sqrt();
        let se = if self.n > 0 {
            sd / (self.n as f64).sqrt()
        } else {
            0.0
        };
        Stat {
            mean: self.mean,
            var,
            sd,
            se,
            ci95: 1.96 * se,
            n: self.n,
        }
    }
}

/// Per-step statistics of one agent; index `i` holds step `t = i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub agent: String,
    pub sims: usize,
    pub k: usize,
    pub reward: Vec<Stat>,
    pub cum_reward: Vec<Stat>,
    /// Per-simulation `cum_reward / t`.
    pub reward_rate: Vec<Stat>,
    /// Per-step optimal reward; `None` when any record lacks it.
    pub optimal_reward: Option<Vec<Stat>>,
    pub regret: Option<Vec<Stat>>,
    pub cum_regret: Option<Vec<Stat>>,
    /// Per-simulation `cum_regret / t`.
    pub regret_rate: Option<Vec<Stat>>,
    /// `arm_share[i][a]`: fraction of simulations that chose arm `a + 1` at
    /// step `i + 1`.
    pub arm_share: Vec<Vec<f64>>,
}

impl AggregateSeries {
    pub fn horizon(&self) -> usize {
        self.reward.len()
    }

    pub fn has_regret(&self) -> bool {
        self.regret.is_some()
    }

    /// Statistics at step `t` (1-based) of a series.
    pub fn at(series: &[Stat], t: usize) -> Stat {
        series[t - 1]
    }
}

/// One series per agent, in agent-name order.
pub fn aggregate(history: &HistoryLog) -> Result<Vec<AggregateSeries>, AnalyticsError> {
    if history.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let mut out = Vec::new();
    for agent in history.agents() {
        let runs = history.runs(&agent);
        if runs.is_empty() {
            continue;
        }
        out.push(aggregate_runs(
            &agent,
            history.arm_count(&agent),
            runs.values().map(Vec::as_slice),
        )?);
    }
    Ok(out)
}

fn aggregate_runs<'a>(
    agent: &str,
    k: usize,
    runs: impl Iterator<Item = &'a [&'a StepRecord]> + Clone,
) -> Result<AggregateSeries, AnalyticsError> {
    let lengths: Vec<usize> = runs.clone().map(<[_]>::len).collect();
    let (min, max) = (
        lengths.iter().copied().min().unwrap_or(0),
        lengths.iter().copied().max().unwrap_or(0),
    );
    let consecutive = runs
        .clone()
        .all(|run| run.iter().enumerate().all(|(i, r)| r.t == i + 1));
    if min != max || !consecutive {
        return Err(AnalyticsError::Ragged {
            agent: agent.to_string(),
            min,
            max,
        });
    }
    let horizon = max;
    let k = k.max(
        runs.clone()
            .flat_map(|run| run.iter().map(|r| r.choice))
            .max()
            .unwrap_or(0),
    );
    let with_regret = runs
        .clone()
        .all(|run| run.iter().all(|r| r.optimal_reward.is_some()));

    let new = || vec![Welford::default(); horizon];
    let (mut reward, mut cum_reward, mut rate) = (new(), new(), new());
    let (mut optimal, mut regret, mut cum_regret, mut regret_rate) = (new(), new(), new(), new());
    let mut counts = vec![vec![0u64; k]; horizon];
    let mut sims = 0;

    for run in runs {
        sims += 1;
        let (mut cr, mut cg) = (0.0, 0.0);
        for (i, r) in run.iter().enumerate() {
            let t = (i + 1) as f64;
            cr += r.reward;
            reward[i].push(r.reward);
            cum_reward[i].push(cr);
            rate[i].push(cr / t);
            counts[i][r.choice - 1] += 1;
            if let (true, Some(o)) = (with_regret, r.optimal_reward) {
                let g = o - r.reward;
                cg += g;
                optimal[i].push(o);
                regret[i].push(g);
                cum_regret[i].push(cg);
                regret_rate[i].push(cg / t);
            }
        }
    }

    let stats = |acc: Vec<Welford>| acc.iter().map(Welford::stat).collect::<Vec<_>>();
    let when = |acc: Vec<Welford>| with_regret.then(|| stats(acc));
    Ok(AggregateSeries {
        agent: agent.to_string(),
        sims,
        k,
        reward: stats(reward),
        cum_reward: stats(cum_reward),
        reward_rate: stats(rate),
        optimal_reward: when(optimal),
        regret: when(regret),
        cum_regret: when(cum_regret),
        regret_rate: when(regret_rate),
        arm_share: counts
            .into_iter()
            .map(|row| row.into_iter().map(|c| c as f64 / sims as f64).collect())
            .collect(),
    })
}
