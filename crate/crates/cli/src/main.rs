use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use anyhow::{Context, Result};
use armlab::analytics::{plot_table, render_svg, Dispersion, PlotKind, PlotOptions};
use armlab::{aggregate, summarize, HistoryLog};
use armlab_cli::{parse_config, run_experiment, EventSink};
use clap::{Parser, Subcommand};

/// Simulate and evaluate bandit policies.
#[derive(Parser)]
#[command(name = "armlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Write outputs here instead of the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, overriding the config and ARMLAB_WORKERS.
        #[arg(long)]
        workers: Option<usize>,
        /// Also append progress events to this file.
        #[arg(long)]
        progress_file: Option<PathBuf>,
        /// No progress events on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// List bandit and policy identifiers with their parameters.
    List,
    /// Print the summary tables of a history file.
    Summarize {
        history: PathBuf,
        /// Drop skipped steps and truncate to the shortest run first.
        #[arg(long)]
        reindex: bool,
    },
    /// Write plot data (CSV) and optionally an SVG chart from a history file.
    Plot {
        history: PathBuf,
        #[arg(long, default_value = "cumulative")]
        kind: PlotKind,
        /// Plot reward instead of regret.
        #[arg(long)]
        reward: bool,
        /// Divide cumulative values by t.
        #[arg(long)]
        rate: bool,
        #[arg(long, default_value = "none")]
        dispersion: Dispersion,
        #[arg(long, default_value_t = 1)]
        interval: usize,
        #[arg(long)]
        smooth: bool,
        /// Comma-separated agent names.
        #[arg(long, value_delimiter = ',')]
        limit_agents: Option<Vec<String>>,
        /// Arms plots: only simulations with this 1-based feature active.
        #[arg(long)]
        limit_context: Option<usize>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
        #[arg(long)]
        reindex: bool,
    },
}

/// Fans progress lines out to stderr and an optional file.
struct Tee(Vec<Box<dyn Write + Send>>);

impl Write for Tee {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        for w in &mut self.0 {
            w.write_all(buf)?;
        }
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        self.0.iter_mut().try_for_each(|w| w.flush())
    }
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    workers: Option<usize>,
    progress_file: Option<PathBuf>,
    quiet: bool,
) -> Result<ExitCode> {
    let mut experiment = match parse_config(&config) {
        Ok(e) => e,
        Err(errors) => {
            eprintln!("{}: invalid config", config.display());
            for e in &errors.0 {
                eprintln!("  {e}");
            }
            return Ok(ExitCode::from(2));
        }
    };
    if let Some(dir) = out {
        experiment.relocate(dir);
    }
    if let Some(n) = workers {
        experiment.set_workers(n);
    }
    let mut sinks: Vec<Box<dyn Write + Send>> = Vec::new();
    if !quiet {
        sinks.push(Box::new(io::stderr()));
    }
    if let Some(path) = &progress_file {
        let file = File::options()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        sinks.push(Box::new(file));
    }
    let events: Option<EventSink> =
        (!sinks.is_empty()).then(|| Arc::new(Mutex::new(Tee(sinks))) as EventSink);

    let report = run_experiment(experiment, events);
    if let Some(summary) = &report.summary {
        print!("{summary}");
    }
    for path in &report.written {
        log::info!("wrote {}", path.display());
    }
    if report.is_ok() {
        return Ok(ExitCode::SUCCESS);
    }
    eprintln!("{} fault(s):", report.faults.len());
    for f in &report.faults {
        eprintln!("  {f}");
    }
    Ok(ExitCode::FAILURE)
}

fn load(path: &PathBuf, reindex: bool) -> Result<HistoryLog> {
    let mut history =
        HistoryLog::load(path).with_context(|| format!("reading {}", path.display()))?;
    if reindex {
        history.reindex();
    }
    Ok(history)
}

fn main() -> Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            workers,
            progress_file,
            quiet,
        } => run(config, out, workers, progress_file, quiet),
        Command::List => {
            print!("{}", armlab::registry::describe());
            Ok(ExitCode::SUCCESS)
        }
        Command::Summarize { history, reindex } => {
            let history = load(&history, reindex)?;
            print!("{}", summarize(&aggregate(&history)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot {
            history,
            kind,
            reward,
            rate,
            dispersion,
            interval,
            smooth,
            limit_agents,
            limit_context,
            csv,
            svg,
            title,
            reindex,
        } => {
            anyhow::ensure!(interval >= 1, "--interval must be at least 1");
            let options = PlotOptions {
                kind,
                regret: !reward,
                rate,
                dispersion,
                interval,
                smooth,
                limit_agents,
                limit_context,
            };
            let title = title.unwrap_or_else(|| history.display().to_string());
            let table = plot_table(&load(&history, reindex)?, &options)?;
            match &csv {
                Some(path) => table.write_csv(File::create(path)?)?,
                None => table.write_csv(io::stdout().lock())?,
            }
            if let Some(path) = svg {
                std::fs::write(&path, render_svg(&table, &title))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
