use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use armlab::analytics::{plot_table, render_svg, PlotTable};
use armlab::engine::Progress;
use armlab::{aggregate, summarize, AggregateSeries, HistoryLog, Simulator};
use serde_json::json;

use crate::config::{Experiment, PlotRequest};

/// Destination for line-delimited JSON progress events.
pub type EventSink = Arc<Mutex<dyn Write + Send>>;

/// What a run produced.
#[derive(Debug, Default)]
pub struct RunReport {
    /// Files written, in order.
    pub written: Vec<PathBuf>,
    pub summary: Option<String>,
    /// Task faults and outputs that could not be produced.
    pub faults: Vec<String>,
}

impl RunReport {
    pub fn is_ok(&self) -> bool {
        self.faults.is_empty()
    }
}

fn emit(sink: Option<&EventSink>, event: serde_json::Value) {
    if let Some(sink) = sink {
        let mut w = sink.lock().unwrap_or_else(|e| e.into_inner());
        // Progress is advisory; a closed pipe must not stop the run.
        let _ = writeln!(w, "{event}");
        let _ = w.flush();
    }
}

/// Runs the experiment and writes every requested output.
pub fn run_experiment(experiment: Experiment, events: Option<EventSink>) -> RunReport {
    let mut report = RunReport::default();
    let Experiment {
        sim,
        agents,
        output_dir,
        history: history_path,
        summary: summary_path,
        plots,
        ..
    } = experiment;

    let agent_names: Vec<&str> = agents.iter().map(|a| a.name()).collect();
    emit(
        events.as_ref(),
        json!({
            "event": "start",
            "agents": agent_names,
            "simulations": sim.simulations,
            "horizon": sim.horizon,
            "global_seed": sim.global_seed,
        }),
    );
    let simulator = match Simulator::new(agents, sim) {
        Ok(s) => s,
        Err(e) => {
            report.faults.push(e.to_string());
            return report;
        }
    };
    let simulator = match events.clone() {
        Some(sink) => simulator.on_progress(move |p: &Progress| {
            emit(
                Some(&sink),
                json!({
                    "event": "progress",
                    "completed": p.completed,
                    "total": p.total,
                    "agent": p.agent,
                    "sim": p.sim,
                }),
            )
        }),
        None => simulator,
    };
    let outcome = simulator.run();
    for f in &outcome.faults {
        report.faults.push(f.to_string());
    }
    emit(
        events.as_ref(),
        json!({
            "event": "finish",
            "records": outcome.history.len(),
            "faults": outcome.faults.len(),
        }),
    );

    if let Err(e) = fs::create_dir_all(&output_dir) {
        report.faults.push(format!("{}: {e}", output_dir.display()));
    }
    let history = outcome.history;
    if let Some(path) = history_path {
        let result = history.save(&path).map_err(|e| e.to_string());
        record(&mut report, &path, result);
    }

    let series = aggregate(&history);
    match &series {
        Ok(series) => report.summary = Some(summarize(series)),
        Err(e) => report.faults.push(format!("summary: {e}")),
    }
    if let Some(path) = summary_path {
        let result = match &report.summary {
            Some(text) => fs::write(&path, text).map_err(|e| e.to_string()),
            None => Err("no summary was computed".to_string()),
        };
        record(&mut report, &path, result);
    }

    for plot in &plots {
        let table = build_plot(&history, series.as_deref().ok(), plot);
        write_plot(&mut report, plot, table);
    }
    report
}

fn build_plot(
    history: &HistoryLog,
    series: Option<&[AggregateSeries]>,
    plot: &PlotRequest,
) -> Result<PlotTable, String> {
    match series {
        Some(series) if plot.options.limit_context.is_none() => {
            PlotTable::from_series(series, &plot.options).map_err(|e| e.to_string())
        }
        _ => plot_table(history, &plot.options).map_err(|e| e.to_string()),
    }
}

fn write_plot(report: &mut RunReport, plot: &PlotRequest, table: Result<PlotTable, String>) {
    if let Some(path) = &plot.csv {
        let result = match &table {
            Ok(t) => fs::File::create(path)
                .map_err(|e| e.to_string())
                .and_then(|f| t.write_csv(f).map_err(|e| e.to_string())),
            Err(e) => Err(e.clone()),
        };
        record(report, path, result);
    }
    if let Some(path) = &plot.svg {
        let result = match &table {
            Ok(t) => fs::write(path, render_svg(t, &plot.title)).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        record(report, path, result);
    }
}

fn record(report: &mut RunReport, path: &Path, result: Result<(), String>) {
    match result {
        Ok(()) => report.written.push(path.to_path_buf()),
        Err(e) => report.faults.push(format!("{}: {e}", path.display())),
    }
}
