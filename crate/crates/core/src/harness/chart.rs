//! SVG line chart of F1 against round day: one line per strategy between the grey
//! unsupervised (lower) and test-optimal (upper) bands.

use std::fmt::Write as _;

use super::report::{BaselineKind, ExperimentReport};
use crate::strategies::StrategyKind;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn colour(kind: StrategyKind) -> &'static str {
    match kind {
        StrategyKind::Rqs => "#1f77b4",
        StrategyKind::Tqs => "#ff7f0e",
        StrategyKind::Uqs => "#2ca02c",
        StrategyKind::Dqs => "#d62728",
    }
}

struct Axes {
    day_min: f64,
    day_max: f64,
}

impl Axes {
    fn x(&self, day: f64) -> f64 {
        let plot = WIDTH - LEFT - RIGHT;
        if self.day_max == self.day_min {
            return LEFT + plot / 2.0;
        }
        LEFT + (day - self.day_min) / (self.day_max - self.day_min) * plot
    }

    fn y(&self, f1: f64) -> f64 {
        let plot = HEIGHT - TOP - BOTTOM;
        TOP + (1.0 - f1.clamp(0.0, 1.0)) * plot
    }
}

pub(super) fn render_chart(report: &ExperimentReport, budget: usize, p_m: f64) -> String {
    let cfg = &report.provenance.config;
    let days = &cfg.round_days;
    let axes = Axes {
        day_min: *days.first().unwrap_or(&0) as f64,
        day_max: *days.last().unwrap_or(&0) as f64,
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">F1 by round day (B={budget}, p_m={p_m})</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0
    );

    // Baseline bands.
    for (kind, fill) in [(BaselineKind::Best, "#bdbdbd"), (BaselineKind::Unsupervised, "#d9d9d9")] {
        let rows: Vec<_> = days.iter().filter_map(|&d| report.baseline(kind, d)).collect();
        if rows.is_empty() {
            continue;
        }
        let upper = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", axes.x(r.day as f64), axes.y(r.f1.mean + r.f1.std)));
        let lower = rows
            .iter()
            .rev()
            .map(|r| format!("{:.2},{:.2}", axes.x(r.day as f64), axes.y(r.f1.mean - r.f1.std)));
        let points: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            s,
            r#"<polygon class="band {}" points="{}" fill="{fill}" fill-opacity="0.6" stroke="none"/>"#,
            kind.as_str(),
            points.join(" ")
        );
        let line: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", axes.x(r.day as f64), axes.y(r.f1.mean)))
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline class="baseline {}" points="{}" fill="none" stroke="#636363" stroke-dasharray="4 3"/>"##,
            kind.as_str(),
            line.join(" ")
        );
    }

    // Axes, ticks and grid.
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<line class="x-axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line class="y-axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="black"/>"#
    );
    for &d in days {
        let x = axes.x(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text class="x-tick" x="{x:.2}" y="{:.2}" text-anchor="middle">{d}</text>"#,
            y0 + 5.0,
            y0 + 20.0
        );
    }
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = axes.y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#eeeeee"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">day</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">F1</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    // Strategy lines and legend.
    let mut legend_y = TOP + 10.0;
    for &kind in &cfg.strategy {
        let cells: Vec<_> = days
            .iter()
            .filter_map(|&d| report.cell(kind, budget, p_m, d))
            .collect();
        if cells.is_empty() {
            continue;
        }
        let c = colour(kind);
        let pts: Vec<String> = cells
            .iter()
            .map(|cell| format!("{:.2},{:.2}", axes.x(cell.day as f64), axes.y(cell.f1.mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="strategy {kind}" points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        for p in &pts {
            let (cx, cy) = p.split_once(',').expect("point has two coordinates");
            let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{c}"/>"#);
        }
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="{c}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{kind}</text>"#,
            lx + 20.0,
            lx + 26.0,
            legend_y + 4.0
        );
        legend_y += 18.0;
    }
    let lx = WIDTH - RIGHT + 15.0;
    for (label, fill) in [("tau_best", "#bdbdbd"), ("tau_us", "#d9d9d9")] {
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="20" height="10" fill="{fill}"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            legend_y - 5.0,
            lx + 26.0,
            legend_y + 4.0
        );
        legend_y += 18.0;
    }
    s.push_str("</svg>\n");
    s
}
