use std::collections::BTreeMap;
use std::fmt::Write;

use super::PlotTable;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Round tick step covering `span` in about five intervals.
fn tick_step(span: f64) -> f64 {
    if span <= 0.0 || !span.is_finite() {
        return 1.0;
    }
    let raw = span / 5.0;
    let base = 10f64.powf(raw.log10().floor());
    let m = raw / base;
    base * if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(hi - lo);
    let mut v = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= hi + step * 1e-9 && out.len() < 50 {
        out.push(if v.abs() < step * 1e-9 { 0.0 } else { v });
        v += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `(t, value, lower, upper)` points of one line.
type Points = Vec<(usize, f64, Option<f64>, Option<f64>)>;

/// Standalone SVG line chart of a plot table, one line per agent and
/// series, with a shaded band where the table has bounds.
pub fn render_svg(table: &PlotTable, title: &str) -> String {
    let mut lines: BTreeMap<(String, String), Points> = BTreeMap::new();
    for r in &table.rows {
        lines
            .entry((r.agent.clone(), r.series.clone()))
            .or_default()
            .push((r.t, r.value, r.lower, r.upper));
    }

    let ts = table.rows.iter().map(|r| r.t as f64);
    let (t_lo, t_hi) = ts.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| {
        (a.min(t), b.max(t))
    });
    let ys = table
        .rows
        .iter()
        .flat_map(|r| [Some(r.value), r.lower, r.upper])
        .flatten()
        .filter(|v| v.is_finite());
    let (mut y_lo, mut y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
        (a.min(y), b.max(y))
    });
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    if y_hi - y_lo < 1e-12 {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let (t_lo, t_hi) = if t_lo.is_finite() {
        (t_lo, t_hi.max(t_lo + 1.0))
    } else {
        (0.0, 1.0)
    };

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + (t - t_lo) / (t_hi - t_lo) * pw;
    let y = |v: f64| TOP + (y_hi - v) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );

    for v in ticks(y_lo, y_hi) {
        let py = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e0e0e0"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            tick_label(v)
        );
    }
    for v in ticks(t_lo, t_hi) {
        let px = x(v);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text><text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        TOP + ph / 2.0,
        escape(&table.label)
    );

    for (i, ((agent, series), points)) in lines.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let band: Vec<(f64, f64, f64)> = points
            .iter()
            .filter_map(|&(t, _, lo, hi)| Some((t as f64, lo?, hi?)))
            .collect();
        if band.len() > 1 {
            let mut d = String::new();
            for (j, &(t, _, hi)) in band.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2} ",
                    if j == 0 { "M" } else { "L" },
                    x(t),
                    y(hi)
                );
            }
            for &(t, lo, _) in band.iter().rev() {
                let _ = write!(d, "L{:.2},{:.2} ", x(t), y(lo));
            }
            let _ = writeln!(
                s,
                r#"<path d="{}Z" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                d
            );
        }
        let pts: Vec<String> = points
            .iter()
            .map(|&(t, v, _, _)| format!("{:.2},{:.2}", x(t as f64), y(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let name = if lines.keys().all(|(a, _)| a == agent) {
            series.clone()
        } else if lines.keys().all(|(_, b)| b == series) {
            agent.clone()
        } else {
            format!("{agent} {series}")
        };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + pw + 12.0,
            LEFT + pw + 32.0,
            LEFT + pw + 38.0,
            ly + 4.0,
            escape(&name)
        );
    }
    s.push_str("</svg>\n");
    s
}
