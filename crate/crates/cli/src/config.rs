//! Experiment configuration files.
//!
//! A config is a TOML document:
//!
//! ```toml
//! horizon = 100
//! simulations = 10000
//! global_seed = 1
//! output_dir = "out"
//!
//! [bandit]
//! type = "contextual_bernoulli"
//! weights = [[0.5, 0.2, 0.1]]
//!
//! [[agents]]
//! policy = "epsilon_greedy"
//! epsilon = 0.1
//!
//! [outputs]
//! history = "history.csv"
//! summary = "summary.txt"
//!
//! [[outputs.plots]]
//! kind = "cumulative"
//! csv = "cum_regret.csv"
//! svg = "cum_regret.svg"
//! ```
//!
//! Keys of `[bandit]` other than `type`, and keys of an agent other than
//! `policy` and `name`, are the parameters listed by `armlab list`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use armlab::analytics::{Dispersion, PlotKind, PlotOptions};
use armlab::registry::{build_bandit, build_policy};
use armlab::{Agent, Bandit, SimConfig};
use serde::Deserialize;
use serde_json::{Map, Value};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "ARMLAB_WORKERS";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub horizon: usize,
    pub simulations: usize,
    #[serde(default)]
    pub global_seed: u64,
    /// Worker threads; `ARMLAB_WORKERS` or the core count when unset.
    pub workers: Option<usize>,
    #[serde(default)]
    pub save_context: bool,
    #[serde(default)]
    pub save_theta: bool,
    #[serde(default)]
    pub reindex: bool,
    pub bandit: BanditSpec,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub outputs: OutputSpec,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, Deserialize)]
pub struct BanditSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AgentSpec {
    pub policy: String,
    pub name: Option<String>,
    #[serde(flatten)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// History CSV; an empty string turns it off.
    #[serde(default = "default_history")]
    pub history: Option<PathBuf>,
    /// Summary text; an empty string turns it off.
    #[serde(default = "default_summary")]
    pub summary: Option<PathBuf>,
    #[serde(default)]
    pub plots: Vec<PlotSpec>,
}

fn default_history() -> Option<PathBuf> {
    Some("history.csv".into())
}

fn default_summary() -> Option<PathBuf> {
    Some("summary.txt".into())
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            history: default_history(),
            summary: default_summary(),
            plots: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub kind: String,
    pub regret: Option<bool>,
    #[serde(default)]
    pub rate: bool,
    pub dispersion: Option<String>,
    pub interval: Option<usize>,
    #[serde(default)]
    pub smooth: bool,
    pub limit_agents: Option<Vec<String>>,
    pub limit_context: Option<usize>,
    pub title: Option<String>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// A requested plot with its resolved output paths.
#[derive(Debug, Clone)]
pub struct PlotRequest {
    pub options: PlotOptions,
    pub title: String,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// A validated config, ready to run.
#[derive(Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub sim: SimConfig,
    pub agents: Vec<Agent>,
    pub output_dir: PathBuf,
    pub history: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub plots: Vec<PlotRequest>,
}

impl Experiment {
    /// Moves every output into `dir`, keeping the names relative to the
    /// configured output directory.
    pub fn relocate(&mut self, dir: impl Into<PathBuf>) {
        let dir = dir.into();
        let old = std::mem::replace(&mut self.output_dir, dir.clone());
        let rebase = |p: &mut PathBuf| {
            if let Ok(rel) = p.strip_prefix(&old) {
                *p = dir.join(rel);
            }
        };
        self.history.iter_mut().for_each(rebase);
        self.summary.iter_mut().for_each(rebase);
        for plot in &mut self.plots {
            plot.csv
                .iter_mut()
                .chain(plot.svg.iter_mut())
                .for_each(rebase);
        }
    }

    pub fn set_workers(&mut self, workers: usize) {
        self.sim.worker_max = Some(workers.max(1));
        self.sim.do_parallel = workers > 1;
    }
}

/// Everything wrong with a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Reads and validates the config at `path`. Relative paths inside it are
/// resolved against its directory.
pub fn parse_config(path: impl AsRef<Path>) -> Result<Experiment, ConfigErrors> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![format!("{}: {e}", path.display())]))?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_config_str(&text, base)
}

/// Parses config text whose relative paths are resolved against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<Experiment, ConfigErrors> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigErrors(vec![e.to_string()]))?;
    validate(config, base_dir)
}

fn json_params(table: &toml::Table) -> Result<Map<String, Value>, String> {
    match serde_json::to_value(table) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => unreachable!("a table serializes to an object"),
        Err(e) => Err(e.to_string()),
    }
}

fn env_workers() -> Result<Option<usize>, String> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{WORKERS_ENV}={v:?} is not a worker count")),
        Err(_) => Ok(None),
    }
}

fn validate(config: ExperimentConfig, base_dir: &Path) -> Result<Experiment, ConfigErrors> {
    let mut errors = Vec::new();
    if config.horizon == 0 {
        errors.push("horizon must be at least 1".to_string());
    }
    if config.simulations == 0 {
        errors.push("simulations must be at least 1".to_string());
    }
    if config.agents.is_empty() {
        errors.push("at least one [[agents]] entry is required".to_string());
    }
    let workers = match config.workers {
        Some(0) => {
            errors.push("workers must be at least 1".to_string());
            None
        }
        Some(n) => Some(n),
        None => env_workers().unwrap_or_else(|e| {
            errors.push(e);
            None
        }),
    };

    let bandit: Option<Box<dyn Bandit>> = match json_params(&config.bandit.params) {
        Ok(params) => match build_bandit(&config.bandit.kind, &params, base_dir) {
            Ok(b) => Some(b),
            Err(es) => {
                errors.extend(
                    es.into_iter()
                        .map(|e| format!("bandit {}: {e}", config.bandit.kind)),
                );
                None
            }
        },
        Err(e) => {
            errors.push(format!("bandit: {e}"));
            None
        }
    };

    let mut agents = Vec::new();
    let mut names = BTreeSet::new();
    for (i, spec) in config.agents.iter().enumerate() {
        let label = match &spec.name {
            Some(name) => format!("agent {} ({name})", i + 1),
            None => format!("agent {}", i + 1),
        };
        let policy = json_params(&spec.params)
            .map_err(|e| vec![e])
            .and_then(|params| build_policy(&spec.policy, &params, config.horizon));
        match policy {
            Ok(policy) => {
                let name = spec
                    .name
                    .clone()
                    .unwrap_or_else(|| policy.name().to_string());
                if !names.insert(name.clone()) {
                    errors.push(format!("{label}: name {name:?} is used twice; set `name`"));
                }
                if let Some(bandit) = &bandit {
                    agents.push(Agent::from_boxed(policy, bandit.clone(), name));
                }
            }
            Err(es) => errors.extend(
                es.into_iter()
                    .map(|e| format!("{label} {}: {e}", spec.policy)),
            ),
        }
    }

    let mut config = config;
    for file in [&mut config.outputs.history, &mut config.outputs.summary] {
        if file.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
            *file = None;
        }
    }
    let output_dir = base_dir.join(&config.output_dir);
    let mut plots = Vec::new();
    for (i, spec) in config.outputs.plots.iter().enumerate() {
        match plot_request(spec, &output_dir) {
            Ok(p) => plots.push(p),
            Err(es) => errors.extend(es.into_iter().map(|e| format!("plot {}: {e}", i + 1))),
        }
    }
    check_unique_outputs(&config.outputs, &mut errors);

    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    let sim = SimConfig {
        horizon: config.horizon,
        simulations: config.simulations,
        global_seed: config.global_seed,
        save_context: config.save_context,
        save_theta: config.save_theta,
        do_parallel: workers != Some(1),
        worker_max: workers,
        reindex: config.reindex,
    };
    Ok(Experiment {
        sim,
        agents,
        history: config.outputs.history.as_ref().map(|p| output_dir.join(p)),
        summary: config.outputs.summary.as_ref().map(|p| output_dir.join(p)),
        plots,
        output_dir,
        config,
    })
}

fn plot_request(spec: &PlotSpec, output_dir: &Path) -> Result<PlotRequest, Vec<String>> {
    let mut errors = Vec::new();
    let kind: Option<PlotKind> = spec.kind.parse().map_err(|e| errors.push(e)).ok();
    let dispersion = match &spec.dispersion {
        Some(d) => d.parse().map_err(|e| errors.push(e)).ok(),
        None => Some(Dispersion::None),
    };
    if spec.interval == Some(0) {
        errors.push("interval must be at least 1".to_string());
    }
    if spec.limit_context == Some(0) {
        errors.push("limit_context is a 1-based feature index".to_string());
    }
    if spec.limit_context.is_some() && kind.is_some_and(|k| k != PlotKind::Arms) {
        errors.push("limit_context applies to arms plots only".to_string());
    }
    if spec.csv.is_none() && spec.svg.is_none() {
        errors.push("name a `csv` or `svg` output".to_string());
    }
    let (Some(kind), Some(dispersion)) = (kind, dispersion) else {
        return Err(errors);
    };
    if !errors.is_empty() {
        return Err(errors);
    }
    let options = PlotOptions {
        kind,
        regret: spec.regret.unwrap_or(true),
        rate: spec.rate,
        dispersion,
        interval: spec.interval.unwrap_or(1),
        smooth: spec.smooth,
        limit_agents: spec.limit_agents.clone(),
        limit_context: spec.limit_context,
    };
    Ok(PlotRequest {
        title: spec.title.clone().unwrap_or_else(|| spec.kind.clone()),
        options,
        csv: spec.csv.as_ref().map(|p| output_dir.join(p)),
        svg: spec.svg.as_ref().map(|p| output_dir.join(p)),
    })
}

fn check_unique_outputs(outputs: &OutputSpec, errors: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    let files = outputs.history.iter().chain(&outputs.summary).chain(
        outputs
            .plots
            .iter()
            .flat_map(|p| p.csv.iter().chain(&p.svg)),
    );
    for f in files {
        if !seen.insert(f) {
            errors.push(format!("output {} is named twice", f.display()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        horizon = 100
        simulations = 10000
        [bandit]
        type = "contextual_bernoulli"
        weights = [[0.5, 0.2, 0.1]]
        [[agents]]
        policy = "epsilon_greedy"
        epsilon = 0.1
    "#;

    fn parse(text: &str) -> Result<Experiment, ConfigErrors> {
        parse_config_str(text, Path::new("/cfg"))
    }

    #[test]
    fn minimal_config() {
        let e = parse(MINIMAL).unwrap();
        assert_eq!((e.sim.horizon, e.sim.simulations), (100, 10_000));
        assert_eq!(e.agents.len(), 1);
        assert_eq!(e.agents[0].name(), "EpsilonGreedy");
        assert_eq!(e.history, Some(PathBuf::from("/cfg/output/history.csv")));
        assert_eq!(e.summary, Some(PathBuf::from("/cfg/output/summary.txt")));
    }

    #[test]
    fn all_errors_are_reported() {
        let text = r#"
            horizon = 0
            simulations = 1
            workers = 0
            [bandit]
            type = "basic_bernoulli"
            weights = [0.5, 1.5]
            [[agents]]
            policy = "epsilon_greedy"
            epsilon = 1.5
            [[agents]]
            policy = "no_such_policy"
            [[outputs.plots]]
            kind = "pie"
        "#;
        let errors = parse(text).unwrap_err().0;
        let joined = errors.join("\n");
        for needle in [
            "horizon must be at least 1",
            "workers must be at least 1",
            "bandit basic_bernoulli",
            "epsilon out of [0,1]",
            "no_such_policy",
            "unknown plot kind",
            "name a `csv` or `svg` output",
        ] {
            assert!(joined.contains(needle), "{needle:?} missing from {joined}");
        }
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let err = parse(&format!("{MINIMAL}\nhorizn = 3\n")).unwrap_err();
        assert!(err.to_string().contains("horizn"), "{err}");
    }

    #[test]
    fn duplicate_default_names_are_rejected() {
        let text = format!("{MINIMAL}\n[[agents]]\npolicy = \"epsilon_greedy\"\nepsilon = 0.2\n");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("used twice"), "{err}");
    }

    #[test]
    fn limit_context_needs_arms_plot() {
        let text = format!("{MINIMAL}\n[[outputs.plots]]\nkind = \"average\"\nlimit_context = 1\ncsv = \"a.csv\"\n");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("arms plots only"), "{err}");
    }

    #[test]
    fn plot_defaults() {
        let text = format!("{MINIMAL}\n[[outputs.plots]]\nkind = \"arms\"\nsvg = \"arms.svg\"\n");
        let e = parse(&text).unwrap();
        let p = &e.plots[0];
        assert_eq!(p.options.kind, PlotKind::Arms);
        assert_eq!(p.options.interval, 1);
        assert_eq!(p.csv, None);
        assert_eq!(p.svg, Some(PathBuf::from("/cfg/output/arms.svg")));
    }

    #[test]
    fn outputs_table_keeps_default_files() {
        let text = format!("{MINIMAL}\n[outputs]\nsummary = \"\"\n");
        let e = parse(&text).unwrap();
        assert_eq!(e.history, Some(PathBuf::from("/cfg/output/history.csv")));
        assert_eq!(e.summary, None);
    }

    #[test]
    fn explicit_single_worker_disables_the_pool() {
        let e = parse(&format!("workers = 1\n{MINIMAL}")).unwrap();
        assert!(!e.sim.do_parallel);
        assert_eq!(e.sim.worker_max, Some(1));
    }
}
