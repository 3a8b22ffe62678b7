use std::fmt::Write;

use super::{AggregateSeries, Stat};

/// Up to 7 significant digits, trailing zeros dropped.
pub fn fmt_sig7(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-5..15).contains(&magnitude) {
        let s = format!("{v:.6e}");
        let (m, e) = s.split_once('e').expect("exponent present");
        let m = if m.contains('.') {
            m.trim_end_matches('0').trim_end_matches('.')
        } else {
            m
        };
        return format!("{m}e{e}");
    }
    let decimals = (6 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn table(
    out: &mut String,
    title: &str,
    names: [&str; 3],
    rows: &[(String, usize, usize, Option<Stat>)],
) {
    let mut cells: Vec<[String; 6]> = vec![[
        "agent".into(),
        "t".into(),
        "sims".into(),
        names[0].into(),
        names[1].into(),
        names[2].into(),
    ]];
    for (agent, t, sims, stat) in rows {
        let (m, v, s) = match stat {
            Some(st) => (fmt_sig7(st.mean), fmt_sig7(st.var), fmt_sig7(st.sd)),
            None => ("n/a".into(), "n/a".into(), "n/a".into()),
        };
        cells.push([agent.clone(), t.to_string(), sims.to_string(), m, v, s]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| {
            cells
                .iter()
                .map(|row| row[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let _ = writeln!(out, "{title}:\n");
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:>w$}"))
            .collect();
        let _ = writeln!(out, " {}", line.join(" "));
    }
    out.push_str("\n\n");
}

/// Final-step cumulative regret, reward and reward rate per agent, one row
/// per agent in name order.
pub fn summarize(series: &[AggregateSeries]) -> String {
    let mut series: Vec<&AggregateSeries> = series.iter().collect();
    series.sort_by(|a, b| a.agent.cmp(&b.agent));

    let mut out = String::from("Agents:\n\n");
    for s in &series {
        let _ = writeln!(out, "  {}", s.agent);
    }
    out.push('\n');

    let rows = |pick: &dyn Fn(&AggregateSeries) -> Option<Stat>| -> Vec<_> {
        series
            .iter()
            .map(|s| (s.agent.clone(), s.horizon(), s.sims, pick(s)))
            .collect()
    };
    let last = |v: &[Stat]| v.last().copied();
    table(
        &mut out,
        "Cumulative regret",
        ["cum_regret", "cum_regret_var", "cum_regret_sd"],
        &rows(&|s| s.cum_regret.as_deref().and_then(last)),
    );
    table(
        &mut out,
        "Cumulative reward",
        ["cum_reward", "cum_reward_var", "cum_reward_sd"],
        &rows(&|s| last(&s.cum_reward)),
    );
    table(
        &mut out,
        "Cumulative reward rate",
        ["cur_reward", "cur_reward_var", "cur_reward_sd"],
        &rows(&|s| last(&s.reward_rate)),
    );
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::aggregate;
    use crate::analytics::tests::rec;
    use crate::history::HistoryLog;

    #[test]
    fn seven_significant_digits() {
        assert_eq!(fmt_sig7(9.115), "9.115");
        assert_eq!(fmt_sig7(101.420_312_5), "101.4203");
        assert_eq!(fmt_sig7(10.070_771), "10.07077");
        assert_eq!(fmt_sig7(0.109_463_01), "0.109463");
        assert_eq!(fmt_sig7(10000.0), "10000");
        assert_eq!(fmt_sig7(9.999_999_9), "10");
        assert_eq!(fmt_sig7(-0.5), "-0.5");
        assert_eq!(fmt_sig7(1.5e-9), "1.5e-9");
    }

    #[test]
    fn layout_and_order() {
        let log = HistoryLog::from_records(vec![
            rec("b", 1, 1, 1, 1.0, Some(1.0)),
            rec("a", 1, 1, 1, 0.0, None),
        ]);
        let text = summarize(&aggregate(&log).unwrap());
        let expected = "\
Agents:

  a
  b

Cumulative regret:

 agent t sims cum_regret cum_regret_var cum_regret_sd
     a 1    1        n/a            n/a           n/a
     b 1    1          0              0             0


Cumulative reward:

 agent t sims cum_reward cum_reward_var cum_reward_sd
     a 1    1          0              0             0
     b 1    1          1              0             0


Cumulative reward rate:

 agent t sims cur_reward cur_reward_var cur_reward_sd
     a 1    1          0              0             0
     b 1    1          1              0             0
";
        assert_eq!(text, expected);
    }
}
