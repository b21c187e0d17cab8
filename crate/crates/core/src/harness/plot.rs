//! Dependency-free SVG line charts of the metrics file.
//!
//! Four panels: training reward, training throughput, evaluation reward and
//! evaluation throughput (one line per scenario). Rewards are per-frame
//! sigmoid values averaged over an episode; throughput is the per-frame sum
//! over all UEs in Mbps, averaged over an episode.

use super::metrics::{MetricsRow, Phase};
use crate::error::{Result, SimError};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Trailing moving average. Series shorter than the window are returned
/// unsmoothed; a window of 0 or 1 is the identity.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 || xs.len() < window {
        return xs.to_vec();
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= xs[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one line chart.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let bottom = MARGIN_TOP + plot_h;
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            bottom + 5.0,
            bottom + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if pts.len() == 1 {
            let (x, y) = s.points[0];
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        } else if !pts.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = MARGIN_TOP + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn series_of(rows: &[&MetricsRow], label: String, window: usize, value: fn(&MetricsRow) -> f64) -> Series {
    let ys: Vec<f64> = rows.iter().map(|r| value(r)).collect();
    let smooth = moving_average(&ys, window);
    Series {
        label,
        points: rows.iter().zip(smooth).map(|(r, y)| (r.episode as f64, y)).collect(),
    }
}

/// File names written by [`plot_metrics`], in panel order.
pub const PANELS: [&str; 4] = [
    "train_reward.svg",
    "train_throughput.svg",
    "eval_reward.svg",
    "eval_throughput.svg",
];

/// Writes the four panels into `out_dir` and returns their paths.
pub fn plot_metrics(rows: &[MetricsRow], window: usize, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(SimError::Metrics("no rows to plot".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let train: Vec<&MetricsRow> = rows.iter().filter(|r| r.phase == Phase::Train).collect();
    let mut scenarios: Vec<&str> = rows
        .iter()
        .filter(|r| r.phase == Phase::Eval)
        .map(|r| r.scenario.as_str())
        .collect();
    scenarios.sort_unstable();
    scenarios.dedup();
    let eval_series = |value: fn(&MetricsRow) -> f64| -> Vec<Series> {
        scenarios
            .iter()
            .map(|sc| {
                let sel: Vec<&MetricsRow> = rows
                    .iter()
                    .filter(|r| r.phase == Phase::Eval && r.scenario == *sc)
                    .collect();
                series_of(&sel, format!("scenario {sc}"), window, value)
            })
            .collect()
    };
    let reward = |r: &MetricsRow| r.mean_reward;
    let tput = |r: &MetricsRow| r.mean_sum_throughput_mbps;
    let panels = [
        render_svg(
            "Mean training reward",
            "episode",
            "reward (per-frame mean)",
            &[series_of(&train, "train".into(), window, reward)],
        ),
        render_svg(
            "Mean training throughput",
            "episode",
            "sum throughput (Mbps)",
            &[series_of(&train, "train".into(), window, tput)],
        ),
        render_svg(
            "Mean evaluation reward",
            "episode",
            "reward (per-frame mean)",
            &eval_series(reward),
        ),
        render_svg(
            "Mean evaluation throughput",
            "episode",
            "sum throughput (Mbps)",
            &eval_series(tput),
        ),
    ];
    let mut paths = Vec::new();
    for (name, svg) in PANELS.iter().zip(panels) {
        let path = out_dir.join(name);
        std::fs::write(&path, svg)?;
        paths.push(path);
    }
    Ok(paths)
}
