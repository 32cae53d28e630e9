use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, HarnessError, StepLog};

/// Performance-ratio targets `1.00, 1.02, ..., 2.00`.
pub fn ratio_grid() -> Vec<f64> {
    (0..=50).map(|j| (100 + 2 * j) as f64 / 100.0).collect()
}

const RATIO_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub config: String,
    pub ratio: f64,
    pub mean_cost_frac: f64,
    pub stderr_cost_frac: f64,
    pub mean_data_frac: f64,
    pub stderr_data_frac: f64,
    pub n_runs: usize,
}

/// Per configuration and ratio target: mean and standard error over runs
/// of the smallest fraction at which a run first reaches the target.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveSummary {
    pub rows: Vec<SummaryRow>,
}

/// Sample mean and standard error; a single value has zero error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Fraction paid when a run first reaches `target`. A run that never gets
/// there counts as needing everything it spent, and at least the full set.
fn fraction_to_reach(run: &[&StepLog], target: f64, pick: fn(&StepLog) -> f64) -> f64 {
    match run.iter().find(|l| l.perf_ratio <= target + RATIO_SLACK) {
        Some(l) => pick(l),
        None => run.last().map_or(1.0, |l| pick(l).max(1.0)),
    }
}

pub fn summarize(logs: &[StepLog]) -> Result<CurveSummary, HarnessError> {
    if logs.is_empty() {
        return Err(HarnessError::EmptyLogs);
    }
    let mut runs: BTreeMap<(&str, &str, usize, u64), Vec<&StepLog>> = BTreeMap::new();
    for l in logs {
        runs.entry((&l.config, &l.scenario, l.fold, l.seed)).or_default().push(l);
    }
    let mut by_config: BTreeMap<&str, Vec<Vec<&StepLog>>> = BTreeMap::new();
    for ((config, ..), mut steps) in runs {
        steps.sort_by_key(|l| l.step);
        by_config.entry(config).or_default().push(steps);
    }
    let mut rows = Vec::new();
    for (config, runs) in by_config {
        for r in ratio_grid() {
            let cost: Vec<f64> = runs.iter().map(|s| fraction_to_reach(s, r, |l| l.cost_frac)).collect();
            let data: Vec<f64> = runs.iter().map(|s| fraction_to_reach(s, r, |l| l.data_frac)).collect();
            let (mean_cost_frac, stderr_cost_frac) = mean_stderr(&cost);
            let (mean_data_frac, stderr_data_frac) = mean_stderr(&data);
            rows.push(SummaryRow {
                config: config.to_string(),
                ratio: r,
                mean_cost_frac,
                stderr_cost_frac,
                mean_data_frac,
                stderr_data_frac,
                n_runs: runs.len(),
            });
        }
    }
    Ok(CurveSummary { rows })
}

impl CurveSummary {
    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        let csv_err = |source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        for r in &self.rows {
            w.serialize(r).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn read_csv(path: &Path) -> Result<Self, HarnessError> {
        let mut r = csv::Reader::from_path(path).map_err(|source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let rows = r.deserialize().collect::<Result<_, _>>().map_err(|source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(CurveSummary { rows })
    }

    /// Distinct configuration names in row order.
    pub fn configs(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if out.last() != Some(&r.config.as_str()) && !out.contains(&r.config.as_str()) {
                out.push(&r.config);
            }
        }
        out
    }
}
