//! Line charts of sweep results as standalone SVG: mean r per cell, one line
//! per kernel and weight mode, with ±1 sd whiskers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use weightwalk_core::analysis::{summarize, WeightMode};
use weightwalk_core::walker::Kernel;

use crate::sweep::{SweepRow, Varied};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 56.0;

fn colour(kernel: Kernel) -> &'static str {
    match kernel {
        Kernel::Rw => "#1f77b4",
        Kernel::Srw => "#ff7f0e",
        Kernel::Wrw => "#2ca02c",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub kernel: Kernel,
    pub weight_mode: WeightMode,
    /// (cell value, mean r, sd r), sorted by cell value.
    pub points: Vec<(f64, f64, f64)>,
}

pub fn series(rows: &[SweepRow]) -> Vec<Series> {
    let mut groups: BTreeMap<(Kernel, WeightMode), BTreeMap<u64, (f64, Vec<Option<f64>>)>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.kernel, r.weight_mode))
            .or_default()
            .entry(r.cell_value.to_bits())
            .or_insert_with(|| (r.cell_value, Vec::new()))
            .1
            .push(r.pearson_r);
    }
    groups
        .into_iter()
        .map(|((kernel, weight_mode), cells)| {
            let mut points: Vec<(f64, f64, f64)> = cells
                .into_values()
                .filter_map(|(x, rs)| {
                    let s = summarize(&rs);
                    Some((x, s.mean?, s.sd.unwrap_or(0.0)))
                })
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                kernel,
                weight_mode,
                points,
            }
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render `rows` (one model, one varied parameter). Size-like parameters
/// spanning more than a factor of 4 get a log2 x axis.
pub fn render_svg(rows: &[SweepRow], title: &str) -> String {
    let all = series(rows);
    let xs: Vec<f64> = all.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let (xmin, xmax) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let varied = rows.first().map(|r| r.varied);
    let log = xmin > 0.0
        && xmax / xmin > 4.0
        && !matches!(varied, Some(Varied::Threshold));
    let tx = |x: f64| if log { x.log2() } else { x };
    let (x0, x1) = if xs.is_empty() {
        (0.0, 1.0)
    } else if xmin == xmax {
        (tx(xmin) - 0.5, tx(xmax) + 0.5)
    } else {
        (tx(xmin), tx(xmax))
    };
    let (y0, y1) = (-0.2_f64, 1.0_f64);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (y1 - y.clamp(y0, y1)) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    // y grid
    for i in 0..=6 {
        let y = y0 + (y1 - y0) * i as f64 / 6.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" x2="{}" y1="{py:.1}" y2="{py:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{y:.1}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py(y) + 4.0,
            py = py(y),
        );
    }
    // x ticks at the data values
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for &x in &ticks {
        let _ = writeln!(
            svg,
            r##"<line x1="{p:.1}" x2="{p:.1}" y1="{}" y2="{}" stroke="#999"/><text x="{p:.1}" y="{}" text-anchor="middle">{x}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            p = px(x),
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let xlabel = varied.map_or("value", |v| v.name());
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 14.0,
        if log { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">Pearson r</text>"#,
        TOP + ph / 2.0
    );
    for (i, s) in all.iter().enumerate() {
        let c = colour(s.kernel);
        let dash = if s.weight_mode == WeightMode::Shuffled { r#" stroke-dasharray="5 3""# } else { "" };
        let pts: Vec<String> = s.points.iter().map(|&(x, m, _)| format!("{:.1},{:.1}", px(x), py(m))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"{dash}/>"#,
            pts.join(" ")
        );
        for &(x, m, sd) in &s.points {
            let _ = writeln!(
                svg,
                r#"<line x1="{p:.1}" x2="{p:.1}" y1="{:.1}" y2="{:.1}" stroke="{c}"/><circle cx="{p:.1}" cy="{:.1}" r="3" fill="{c}"/>"#,
                py(m - sd),
                py(m + sd),
                py(m),
                p = px(x),
            );
        }
        let ly = TOP + 14.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{c}" stroke-width="2"{dash}/><text x="{}" y="{}">{} {}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            s.kernel,
            s.weight_mode.name()
        );
    }
    svg.push_str("</svg>\n");
    svg
}
