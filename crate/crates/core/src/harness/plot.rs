use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{io_err, ConfigId, CurveSummary, HarnessError, Selection};

/// How configurations are combined into plotted series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    /// One series per configuration.
    None,
    /// Frugal configurations pooled by instance-selection strategy.
    Selection,
    /// Frugal configurations pooled by timeout predictor on/off.
    TimeoutPredictor,
    /// Frugal configurations pooled by dynamic timeout on/off.
    DynamicTimeout,
}

impl FromStr for Aggregate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Aggregate::None),
            "selection" => Ok(Aggregate::Selection),
            "to" => Ok(Aggregate::TimeoutPredictor),
            "dt" => Ok(Aggregate::DynamicTimeout),
            _ => Err(format!("unknown aggregation {s:?} (none, selection, to, dt)")),
        }
    }
}

/// Vertical axis of the plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    CostFraction,
    DataFraction,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cost" => Ok(Metric::CostFraction),
            "data" => Ok(Metric::DataFraction),
            _ => Err(format!("unknown metric {s:?} (cost, data)")),
        }
    }
}

fn series_key(config: &str, how: Aggregate) -> Option<String> {
    if how == Aggregate::None {
        return Some(config.to_string());
    }
    let ConfigId::Frugal {
        selection,
        timeout_predictor,
        dynamic_timeout,
    } = config.parse::<ConfigId>().ok()?
    else {
        return None;
    };
    Some(
        match how {
            Aggregate::Selection => match selection {
                Selection::Uncertainty => "uncertainty",
                Selection::Random => "random",
            },
            Aggregate::TimeoutPredictor if timeout_predictor => "TO",
            Aggregate::TimeoutPredictor => "no TO",
            Aggregate::DynamicTimeout if dynamic_timeout => "DT",
            Aggregate::DynamicTimeout => "no DT",
            Aggregate::None => unreachable!(),
        }
        .to_string(),
    )
}

/// Running totals that pool runs exactly from per-group (n, mean, stderr).
#[derive(Default, Clone, Copy)]
struct Pool {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Pool {
    fn add(&mut self, n: usize, mean: f64, stderr: f64) {
        let n = n as f64;
        let var = stderr * stderr * n;
        self.n += n;
        self.sum += n * mean;
        self.sum_sq += (n - 1.0).max(0.0) * var + n * mean * mean;
    }

    fn mean_stderr(&self) -> (f64, f64) {
        let mean = self.sum / self.n;
        if self.n < 2.0 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq - self.n * mean * mean) / (self.n - 1.0)).max(0.0);
        (mean, (var / self.n).sqrt())
    }
}

struct Series {
    name: String,
    points: Vec<(f64, f64, f64)>,
}

fn build_series(summary: &CurveSummary, how: Aggregate, metric: Metric) -> Vec<Series> {
    let mut groups: BTreeMap<String, BTreeMap<u64, Pool>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for r in &summary.rows {
        let Some(key) = series_key(&r.config, how) else {
            continue;
        };
        if !order.contains(&key) {
            order.push(key.clone());
        }
        let (mean, se) = match metric {
            Metric::CostFraction => (r.mean_cost_frac, r.stderr_cost_frac),
            Metric::DataFraction => (r.mean_data_frac, r.stderr_data_frac),
        };
        groups
            .entry(key)
            .or_default()
            .entry(r.ratio.to_bits())
            .or_default()
            .add(r.n_runs, mean, se);
    }
    order
        .into_iter()
        .map(|name| {
            let mut points: Vec<(f64, f64, f64)> = groups[&name]
                .iter()
                .map(|(&bits, pool)| {
                    let (m, se) = pool.mean_stderr();
                    (f64::from_bits(bits), m, se)
                })
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { name, points }
        })
        .collect()
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Writes an SVG with one mean line and one standard-error ribbon per
/// series. Returns the number of series drawn.
pub fn emit_plot(summary: &CurveSummary, how: Aggregate, metric: Metric, path: &Path) -> Result<usize, HarnessError> {
    let series = build_series(summary, how, metric);
    if series.is_empty() {
        return Err(HarnessError::EmptySummary);
    }
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 170.0, 20.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let x_min = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).fold(f64::INFINITY, f64::min);
    let mut x_max = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).fold(f64::NEG_INFINITY, f64::max);
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let y_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1 + p.2))
        .fold(1.0, f64::max);
    let sx = |x: f64| left + (x - x_min) / (x_max - x_min) * pw;
    let sy = |y: f64| top + ph - y / y_max * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    // axes and ticks
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        top + ph,
        left + pw,
        top + ph
    );
    let _ = writeln!(svg, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + ph);
    for k in 0..=5 {
        let x = x_min + (x_max - x_min) * k as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x:.2}</text>"#,
            sx(x),
            top + ph + 16.0
        );
        let y = y_max * k as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.2}</text>"#,
            left - 6.0,
            sy(y) + 4.0
        );
    }
    let y_label = match metric {
        Metric::CostFraction => "minimum labelling cost fraction",
        Metric::DataFraction => "minimum labelled data fraction",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">performance ratio (frugal / passive)</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{y_label}</text>"#,
        top + ph / 2.0
    );

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut ribbon = String::new();
        for (j, &(x, m, se)) in s.points.iter().enumerate() {
            let _ = write!(ribbon, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, sx(x), sy(m + se));
        }
        for &(x, m, se) in s.points.iter().rev() {
            let _ = write!(ribbon, "L{:.2},{:.2} ", sx(x), sy((m - se).max(0.0)));
        }
        ribbon.push('Z');
        let _ = writeln!(
            svg,
            r#"<path class="ribbon" d="{ribbon}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#
        );
        let pts: Vec<String> = s.points.iter().map(|&(x, m, _)| format!("{:.2},{:.2}", sx(x), sy(m))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="mean" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        let ly = top + 14.0 + 18.0 * k as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx}" y="{:.1}" width="14" height="4" fill="{color}"/><text x="{}" y="{ly:.1}">{}</text>"#,
            ly - 6.0,
            lx + 20.0,
            s.name.replace('&', "&amp;").replace('<', "&lt;")
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(io_err(path))?;
    Ok(series.len())
}
