use std::io::Write;

use super::{aggregate, AggregateSeries, AnalyticsError, Stat};
use crate::history::{fmt_g17, HistoryLog, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlotKind {
    /// Per-step reward or regret.
    Average,
    /// Cumulative reward or regret, optionally divided by `t`.
    #[default]
    Cumulative,
    /// Percentage of simulations choosing each arm.
    Arms,
}

impl std::str::FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "average" => Ok(Self::Average),
            "cumulative" => Ok(Self::Cumulative),
            "arms" => Ok(Self::Arms),
            _ => Err(format!(
                "unknown plot kind {s:?} (average, cumulative, arms)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dispersion {
    #[default]
    None,
    Sd,
    Var,
    /// 95% confidence interval.
    Ci,
}

impl std::str::FromStr for Dispersion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "sd" => Ok(Self::Sd),
            "var" => Ok(Self::Var),
            "ci" => Ok(Self::Ci),
            _ => Err(format!("unknown dispersion {s:?} (none, sd, var, ci)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub kind: PlotKind,
    pub regret: bool,
    pub rate: bool,
    pub dispersion: Dispersion,
    /// Keep `t = 1` and every multiple of `interval`.
    pub interval: usize,
    /// Centered moving average of width `interval` before thinning.
    pub smooth: bool,
    pub limit_agents: Option<Vec<String>>,
    /// Arms plots only: count only simulations whose context had this
    /// (1-based) feature active at `t`.
    pub limit_context: Option<usize>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            kind: PlotKind::Cumulative,
            regret: true,
            rate: false,
            dispersion: Dispersion::None,
            interval: 1,
            smooth: false,
            limit_agents: None,
            limit_context: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub agent: String,
    pub t: usize,
    pub series: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Tidy plot data: one row per agent, step and series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotTable {
    pub rows: Vec<PlotRow>,
    /// Y-axis label.
    pub label: String,
}

impl PlotTable {
    /// Builds the table from aggregated series. `limit_context` needs the
    /// history; use [`plot_table`] for it.
    pub fn from_series(
        series: &[AggregateSeries],
        options: &PlotOptions,
    ) -> Result<Self, AnalyticsError> {
        if options.limit_context.is_some() && options.kind == PlotKind::Arms {
            return Err(AnalyticsError::NoContexts);
        }
        let mut rows = Vec::new();
        for s in select(series, options)? {
            match options.kind {
                PlotKind::Arms => {
                    let shares = s
                        .arm_share
                        .iter()
                        .map(|row| Some(row.clone()))
                        .collect::<Vec<_>>();
                    rows.extend(arm_rows(&s.agent, s.k, &shares, options));
                }
                kind => {
                    let (name, stats) = pick(s, kind, options);
                    if let Some(stats) = stats {
                        rows.extend(stat_rows(&s.agent, &name, stats, options));
                    }
                }
            }
        }
        Ok(Self {
            rows,
            label: label(options),
        })
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["agent", "t", "series", "value", "lower", "upper"])?;
        let opt = |v: Option<f64>| v.map(fmt_g17).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.agent.clone(),
                r.t.to_string(),
                r.series.clone(),
                fmt_g17(r.value),
                opt(r.lower),
                opt(r.upper),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Plot table straight from a history; supports every option.
pub fn plot_table(
    history: &HistoryLog,
    options: &PlotOptions,
) -> Result<PlotTable, AnalyticsError> {
    let series = aggregate(history)?;
    let Some(feature) = options
        .limit_context
        .filter(|_| options.kind == PlotKind::Arms)
    else {
        let options = PlotOptions {
            limit_context: None,
            ..options.clone()
        };
        return PlotTable::from_series(&series, &options);
    };
    let mut rows = Vec::new();
    for s in select(&series, options)? {
        let shares = conditional_arm_share(history, &s.agent, feature)?;
        rows.extend(arm_rows(&s.agent, s.k, &shares, options));
    }
    Ok(PlotTable {
        rows,
        label: label(options),
    })
}

/// Arm shares at each step among the simulations whose context had
/// `feature` (1-based) active, meaning non-zero in any arm column. `None`
/// where no simulation qualified.
pub fn conditional_arm_share(
    history: &HistoryLog,
    agent: &str,
    feature: usize,
) -> Result<Vec<Option<Vec<f64>>>, AnalyticsError> {
    let runs = history.runs(agent);
    if runs.is_empty() {
        return Err(AnalyticsError::UnknownAgent(agent.to_string()));
    }
    let k = history.arm_count(agent);
    let horizon = runs.values().flatten().map(|r| r.t).max().unwrap_or(0);
    let mut counts = vec![vec![0u64; k]; horizon];
    for r in runs.values().flatten() {
        if active(r, feature)? {
            counts[r.t - 1][r.choice - 1] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|row| {
            let n: u64 = row.iter().sum();
            (n > 0).then(|| row.iter().map(|&c| c as f64 / n as f64).collect())
        })
        .collect())
}

fn active(r: &StepRecord, feature: usize) -> Result<bool, AnalyticsError> {
    let x = r
        .context
        .as_ref()
        .and_then(|c| c.x.as_ref())
        .ok_or(AnalyticsError::NoContexts)?;
    if feature == 0 || feature > x.nrows() {
        return Err(AnalyticsError::NoSuchFeature {
            feature,
            d: x.nrows(),
        });
    }
    Ok(x.row(feature - 1).iter().any(|&v| v != 0.0))
}

fn select<'a>(
    series: &'a [AggregateSeries],
    options: &PlotOptions,
) -> Result<Vec<&'a AggregateSeries>, AnalyticsError> {
    match &options.limit_agents {
        None => Ok(series.iter().collect()),
        Some(names) => names
            .iter()
            .map(|n| {
                series
                    .iter()
                    .find(|s| &s.agent == n)
                    .ok_or_else(|| AnalyticsError::UnknownAgent(n.clone()))
            })
            .collect(),
    }
}

fn pick<'a>(
    s: &'a AggregateSeries,
    kind: PlotKind,
    o: &PlotOptions,
) -> (String, Option<&'a [Stat]>) {
    let (name, stats) = match (kind, o.regret, o.rate) {
        (PlotKind::Average, false, _) => ("reward", Some(&s.reward)),
        (PlotKind::Average, true, _) => ("regret", s.regret.as_ref()),
        (_, false, false) => ("cum_reward", Some(&s.cum_reward)),
        (_, false, true) => ("cum_reward_rate", Some(&s.reward_rate)),
        (_, true, false) => ("cum_regret", s.cum_regret.as_ref()),
        (_, true, true) => ("cum_regret_rate", s.regret_rate.as_ref()),
    };
    (name.to_string(), stats.map(Vec::as_slice))
}

fn label(o: &PlotOptions) -> String {
    match o.kind {
        PlotKind::Arms => "arm choice %".into(),
        PlotKind::Average if o.regret => "average regret".into(),
        PlotKind::Average => "average reward".into(),
        PlotKind::Cumulative => {
            let what = if o.regret { "regret" } else { "reward" };
            if o.rate {
                format!("cumulative {what} rate")
            } else {
                format!("cumulative {what}")
            }
        }
    }
}

fn keep(t: usize, interval: usize) -> bool {
    t == 1 || t.is_multiple_of(interval.max(1))
}

/// Centered moving average with a window of `width` clipped at the ends.
fn smooth(values: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return values.to_vec();
    }
    let (before, after) = ((width - 1) / 2, width / 2);
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn stat_rows(agent: &str, name: &str, stats: &[Stat], o: &PlotOptions) -> Vec<PlotRow> {
    let spread = |s: &Stat| match o.dispersion {
        Dispersion::None => None,
        Dispersion::Sd => Some(s.sd),
        Dispersion::Var => Some(s.var),
        Dispersion::Ci => Some(s.ci95),
    };
    let mut values: Vec<f64> = stats.iter().map(|s| s.mean).collect();
    let mut spreads: Vec<Option<f64>> = stats.iter().map(spread).collect();
    if o.smooth {
        values = smooth(&values, o.interval);
        if o.dispersion != Dispersion::None {
            let raw: Vec<f64> = spreads.iter().map(|s| s.unwrap_or(0.0)).collect();
            spreads = smooth(&raw, o.interval).into_iter().map(Some).collect();
        }
    }
    values
        .iter()
        .zip(&spreads)
        .enumerate()
        .map(|(i, (&v, w))| (i + 1, v, *w))
        .filter(|(t, _, _)| keep(*t, o.interval))
        .map(|(t, value, w)| PlotRow {
            agent: agent.to_string(),
            t,
            series: name.to_string(),
            value,
            lower: w.map(|w| value - w),
            upper: w.map(|w| value + w),
        })
        .collect()
}

fn arm_rows(agent: &str, k: usize, shares: &[Option<Vec<f64>>], o: &PlotOptions) -> Vec<PlotRow> {
    let mut rows = Vec::new();
    for (i, row) in shares.iter().enumerate() {
        let t = i + 1;
        let Some(row) = row else { continue };
        if !keep(t, o.interval) {
            continue;
        }
        for arm in 0..k {
            rows.push(PlotRow {
                agent: agent.to_string(),
                t,
                series: format!("arm_{}", arm + 1),
                value: 100.0 * row.get(arm).copied().unwrap_or(0.0),
                lower: None,
                upper: None,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::tests::rec;
    use crate::context::ContextSnapshot;
    use nalgebra::DMatrix;

    fn log() -> HistoryLog {
        let mut records = Vec::new();
        for sim in 1..=4 {
            for t in 1..=6 {
                records.push(rec(
                    "a",
                    sim,
                    t,
                    (sim + t) % 3 + 1,
                    (t % 2) as f64,
                    Some(1.0),
                ));
                records.push(rec("b", sim, t, 1, 1.0, None));
            }
        }
        let mut log = HistoryLog::from_records(records);
        log.set_arm_count("a", 3);
        log.set_arm_count("b", 3);
        log
    }

    #[test]
    fn arm_percentages_sum_to_100() {
        let options = PlotOptions {
            kind: PlotKind::Arms,
            ..PlotOptions::default()
        };
        let table = plot_table(&log(), &options).unwrap();
        for agent in ["a", "b"] {
            for t in 1..=6 {
                let total: f64 = table
                    .rows
                    .iter()
                    .filter(|r| r.agent == agent && r.t == t)
                    .map(|r| r.value)
                    .sum();
                assert!((total - 100.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ci_band_and_thinning() {
        let options = PlotOptions {
            regret: false,
            dispersion: Dispersion::Ci,
            interval: 3,
            limit_agents: Some(vec!["a".into()]),
            ..PlotOptions::default()
        };
        let series = aggregate(&log()).unwrap();
        let table = PlotTable::from_series(&series, &options).unwrap();
        let ts: Vec<usize> = table.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![1, 3, 6]);
        let s = series[0].cum_reward[2];
        let row = &table.rows[1];
        assert_eq!(row.series, "cum_reward");
        assert_eq!(row.upper.unwrap() - row.value, s.ci95);
        assert!((s.ci95 - 1.96 * s.sd / 2.0).abs() < 1e-15);
    }

    #[test]
    fn regret_plot_skips_agents_without_optimum() {
        let table =
            PlotTable::from_series(&aggregate(&log()).unwrap(), &PlotOptions::default()).unwrap();
        assert!(table
            .rows
            .iter()
            .all(|r| r.agent == "a" && r.series == "cum_regret"));
    }

    #[test]
    fn smoothing_is_a_centered_moving_average() {
        assert_eq!(
            smooth(&[1.0, 2.0, 3.0, 4.0, 5.0], 3),
            vec![1.5, 2.0, 3.0, 4.0, 4.5]
        );
        assert_eq!(smooth(&[1.0, 2.0], 1), vec![1.0, 2.0]);
    }

    #[test]
    fn limit_context_needs_contexts() {
        let options = PlotOptions {
            kind: PlotKind::Arms,
            limit_context: Some(1),
            ..PlotOptions::default()
        };
        assert_eq!(
            plot_table(&log(), &options),
            Err(AnalyticsError::NoContexts)
        );
    }

    #[test]
    fn conditional_share_counts_active_feature_only() {
        let mut records = Vec::new();
        for sim in 1..=4 {
            let feature = if sim <= 2 { 0 } else { 1 };
            let mut r = rec("a", sim, 1, if sim <= 2 { 1 } else { 2 }, 1.0, None);
            r.context = Some(Box::new(ContextSnapshot::with_features(DMatrix::from_fn(
                2,
                2,
                |i, _| {
                    if i == feature {
                        1.0
                    } else {
                        0.0
                    }
                },
            ))));
            records.push(r);
        }
        let log = HistoryLog::from_records(records);
        assert_eq!(
            conditional_arm_share(&log, "a", 1).unwrap(),
            vec![Some(vec![1.0, 0.0])]
        );
        assert_eq!(
            conditional_arm_share(&log, "a", 2).unwrap(),
            vec![Some(vec![0.0, 1.0])]
        );
        assert!(matches!(
            conditional_arm_share(&log, "a", 3),
            Err(AnalyticsError::NoSuchFeature { .. })
        ));
    }

    #[test]
    fn tidy_csv_header() {
        let table =
            PlotTable::from_series(&aggregate(&log()).unwrap(), &PlotOptions::default()).unwrap();
        let csv = table.to_csv_string();
        assert!(csv.starts_with("agent,t,series,value,lower,upper\na,1,cum_regret,"));
    }
}
