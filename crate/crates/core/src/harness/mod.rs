//! Experiment orchestration: passive baselines, the configuration grid over
//! folds and seeds, per-step CSV logs, learning-curve summaries and plots.

mod plot;
mod summary;

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aslib::Scenario;
use crate::forest::ForestConfig;
use crate::frugal::{
    batch_size_for, run_forest, run_loop, ControllerConfig, LoopConfig, LoopError, SelectionStrategy,
};
use crate::labels::LabelStore;
use crate::preprocess::{fit_imputer, make_splits, Fold, PreprocessError, SplitPlan};
use crate::seeds::derive_seed;
use crate::selector::{algorithm_pairs, evaluate_selector, train_ensemble, SelectorError, TrainingData};

pub use plot::{emit_plot, Aggregate, Metric};
pub use summary::{ratio_grid, summarize, CurveSummary, SummaryRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv error in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Selector(#[from] SelectorError),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("no step logs found")]
    EmptyLogs,
    #[error("nothing to plot")]
    EmptySummary,
    #[error("unknown configuration {0:?}")]
    UnknownConfig(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One arm of the experiment: a frugal configuration or a passive baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConfigId {
    Frugal {
        selection: Selection,
        timeout_predictor: bool,
        dynamic_timeout: bool,
    },
    Passive {
        timeout_predictor: bool,
    },
}

/// Ordered, hashable mirror of [`SelectionStrategy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selection {
    Uncertainty,
    Random,
}

impl From<Selection> for SelectionStrategy {
    fn from(s: Selection) -> Self {
        match s {
            Selection::Uncertainty => SelectionStrategy::Uncertainty,
            Selection::Random => SelectionStrategy::Random,
        }
    }
}

impl ConfigId {
    /// The eight frugal configurations, uncertainty first.
    pub fn frugal_grid() -> Vec<ConfigId> {
        let mut out = Vec::with_capacity(8);
        for selection in [Selection::Uncertainty, Selection::Random] {
            for (timeout_predictor, dynamic_timeout) in [(false, false), (true, false), (false, true), (true, true)] {
                out.push(ConfigId::Frugal {
                    selection,
                    timeout_predictor,
                    dynamic_timeout,
                });
            }
        }
        out
    }

    pub fn timeout_predictor(&self) -> bool {
        match *self {
            ConfigId::Frugal { timeout_predictor, .. } | ConfigId::Passive { timeout_predictor } => timeout_predictor,
        }
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (head, to, dt) = match *self {
            ConfigId::Frugal {
                selection,
                timeout_predictor,
                dynamic_timeout,
            } => (
                match selection {
                    Selection::Uncertainty => "uncertainty",
                    Selection::Random => "random",
                },
                timeout_predictor,
                dynamic_timeout,
            ),
            ConfigId::Passive { timeout_predictor } => ("passive", timeout_predictor, false),
        };
        f.write_str(head)?;
        if to {
            f.write_str("+to")?;
        }
        if dt {
            f.write_str("+dt")?;
        }
        Ok(())
    }
}

impl FromStr for ConfigId {
    type Err = HarnessError;

    /// Accepts the names produced by `Display`, e.g. `random+to+dt` or `passive`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || HarnessError::UnknownConfig(s.to_string());
        let mut parts = s.trim().split('+');
        let head = parts.next().ok_or_else(unknown)?;
        let (mut to, mut dt) = (false, false);
        for p in parts {
            match p {
                "to" if !to && !dt => to = true,
                "dt" if !dt => dt = true,
                _ => return Err(unknown()),
            }
        }
        let selection = match head {
            "uncertainty" => Selection::Uncertainty,
            "random" => Selection::Random,
            "passive" if !dt => return Ok(ConfigId::Passive { timeout_predictor: to }),
            _ => return Err(unknown()),
        };
        Ok(ConfigId::Frugal {
            selection,
            timeout_predictor: to,
            dynamic_timeout: dt,
        })
    }
}

/// What to run: configurations × folds × seeds on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub configs: Vec<ConfigId>,
    /// Fold indices in `0..10`.
    pub folds: Vec<usize>,
    /// One run per fold for each seed.
    pub seeds: Vec<u64>,
    /// Seed of the test/fold partition, shared by every cell.
    pub split_seed: u64,
    /// Requests per step as a fraction of the fold's training instances.
    pub batch_frac: f64,
    pub forest: ForestConfig,
    pub controller: ControllerConfig,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    /// The eight frugal configurations over ten folds and five seeds.
    pub fn standard(out_dir: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            configs: ConfigId::frugal_grid(),
            folds: (0..10).collect(),
            seeds: (0..5).collect(),
            split_seed: 0,
            batch_frac: 0.01,
            forest: ForestConfig::default(),
            controller: ControllerConfig::default(),
            out_dir: out_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidSpec(m.to_string()));
        if self.configs.is_empty() {
            return bad("no configurations");
        }
        if self.folds.is_empty() || self.folds.iter().any(|&f| f >= crate::preprocess::N_FOLDS) {
            return bad("folds must be a nonempty subset of 0..10");
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.is_empty() || seeds.len() != self.seeds.len() {
            return bad("seeds must be nonempty and distinct");
        }
        if !(self.batch_frac > 0.0 && self.batch_frac <= 1.0) {
            return bad("batch fraction must be in (0, 1]");
        }
        Ok(())
    }

    /// Seed of the learning run for one (fold, seed) cell.
    pub fn run_seed(&self, fold: usize, seed: u64) -> u64 {
        derive_seed(seed, fold as u64)
    }

    pub fn cell_path(&self, config: ConfigId, fold: usize, seed: u64) -> PathBuf {
        self.out_dir.join(config.to_string()).join(format!("fold{fold}_seed{seed}.csv"))
    }
}

/// One row of a per-run CSV log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub config: String,
    pub scenario: String,
    pub fold: usize,
    pub seed: u64,
    pub step: usize,
    pub timeout_s: f64,
    pub labels: usize,
    pub cost_s: f64,
    pub cost_frac: f64,
    pub data_frac: f64,
    pub test_par10_s: f64,
    pub perf_ratio: f64,
}

/// CPU seconds to run every algorithm on every training instance to the cutoff.
pub fn passive_cost(scenario: &Scenario, train: &[usize]) -> f64 {
    train
        .iter()
        .flat_map(|&i| (0..scenario.n_algorithms()).map(move |a| (i, a)))
        .map(|(i, a)| scenario.capped_runtime(i, a))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassiveResult {
    pub test_par10: f64,
    pub cost: f64,
}

/// Trains on every training instance fully observed at the cutoff and
/// scores the test set.
pub fn run_passive_baseline(
    scenario: &Scenario,
    fold: &Fold,
    test: &[usize],
    forest: &ForestConfig,
    seed: u64,
    timeout_models: bool,
) -> Result<PassiveResult, HarnessError> {
    let imputer = fit_imputer(scenario, &fold.train)?;
    let rows: Vec<Vec<f64>> = scenario.feature_values.iter().map(|r| imputer.apply(r)).collect();
    let mut store = LabelStore::new(scenario.n_instances(), scenario.n_algorithms());
    for &i in &fold.train {
        for a in 0..scenario.n_algorithms() {
            let ex = crate::frugal::simulate(scenario, i, a, scenario.cutoff);
            store.record(i, a, ex.observation);
        }
    }
    let data = TrainingData {
        scenario,
        rows: &rows,
        imputer: &imputer,
        train: &fold.train,
    };
    let level = timeout_models.then_some(scenario.cutoff);
    let ensemble = train_ensemble(&data, &store, &run_forest(forest, seed), level)?;
    Ok(PassiveResult {
        test_par10: evaluate_selector(&ensemble, test, scenario),
        cost: passive_cost(scenario, &fold.train),
    })
}

fn ratio(value: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        value / reference
    } else if value > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Step logs of one grid cell. Passive arms produce a single row.
pub fn run_cell(
    scenario: &Scenario,
    plan: &SplitPlan,
    spec: &ExperimentSpec,
    config: ConfigId,
    fold_index: usize,
    seed: u64,
) -> Result<Vec<StepLog>, HarnessError> {
    let fold = &plan.folds[fold_index];
    let run_seed = spec.run_seed(fold_index, seed);
    let reference = run_passive_baseline(scenario, fold, &plan.test, &spec.forest, run_seed, false)?;
    let n_entries = algorithm_pairs(scenario.n_algorithms()).len() * fold.train.len();
    let row = |step, timeout_s, labels: usize, cost_s: f64, test_par10_s: f64| StepLog {
        config: config.to_string(),
        scenario: scenario.id.clone(),
        fold: fold_index,
        seed,
        step,
        timeout_s,
        labels,
        cost_s,
        cost_frac: ratio(cost_s, reference.cost),
        data_frac: if n_entries > 0 { labels as f64 / n_entries as f64 } else { 1.0 },
        test_par10_s,
        perf_ratio: ratio(test_par10_s, reference.test_par10),
    };
    match config {
        ConfigId::Passive { timeout_predictor } => {
            let r = if timeout_predictor {
                run_passive_baseline(scenario, fold, &plan.test, &spec.forest, run_seed, true)?
            } else {
                reference
            };
            Ok(vec![row(0, scenario.cutoff, n_entries, r.cost, r.test_par10)])
        }
        ConfigId::Frugal {
            selection,
            timeout_predictor,
            dynamic_timeout,
        } => {
            let n = batch_size_for(fold.train.len(), spec.batch_frac);
            let cfg = LoopConfig {
                selection: selection.into(),
                timeout_predictor,
                dynamic_timeout,
                batch_size: n,
                initial_size: n.min(fold.train.len()),
                seed: run_seed,
                forest: spec.forest.clone(),
                controller: spec.controller.clone(),
            };
            let steps = run_loop(scenario, fold, &plan.test, &cfg)?;
            Ok(steps
                .iter()
                .map(|s| row(s.step, s.timeout, s.labels, s.cost, s.test_par10))
                .collect())
        }
    }
}

pub fn write_logs(path: &Path, logs: &[StepLog]) -> Result<(), HarnessError> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for l in logs {
        w.serialize(l).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_logs(path: &Path) -> Result<Vec<StepLog>, HarnessError> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

/// Every `*.csv` log under `<dir>/<config>/`, in path order.
pub fn collect_logs(dir: &Path) -> Result<Vec<StepLog>, HarnessError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let sub = entry.map_err(io_err(dir))?.path();
        if !sub.is_dir() {
            continue;
        }
        for f in fs::read_dir(&sub).map_err(io_err(&sub))? {
            let p = f.map_err(io_err(&sub))?.path();
            if p.extension().is_some_and(|e| e == "csv") {
                files.push(p);
            }
        }
    }
    files.sort();
    let mut out = Vec::new();
    for f in files {
        out.extend(read_logs(&f)?);
    }
    if out.is_empty() {
        return Err(HarnessError::EmptyLogs);
    }
    Ok(out)
}

/// Outcome of one grid cell, reported as cells finish.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub config: ConfigId,
    pub fold: usize,
    pub seed: u64,
    pub path: PathBuf,
    /// `None` when an existing complete file was kept.
    pub steps: Option<usize>,
    pub final_ratio: Option<f64>,
}

/// Runs every (config, fold, seed) cell in parallel, one CSV per cell under
/// `<out>/<config>/`. Files are written under a temporary name and renamed
/// when complete, so an interrupted grid resumes by skipping existing files.
pub fn run_grid<F>(scenario: &Scenario, spec: &ExperimentSpec, progress: F) -> Result<Vec<CellReport>, HarnessError>
where
    F: Fn(&CellReport) + Sync,
{
    spec.validate()?;
    let plan = make_splits(scenario, spec.split_seed)?;
    for c in &spec.configs {
        let d = spec.out_dir.join(c.to_string());
        fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    let cells: Vec<(ConfigId, usize, u64)> = spec
        .configs
        .iter()
        .flat_map(|&c| spec.folds.iter().flat_map(move |&f| spec.seeds.iter().map(move |&s| (c, f, s))))
        .collect();
    cells
        .par_iter()
        .map(|&(config, fold, seed)| {
            let path = spec.cell_path(config, fold, seed);
            let report = if path.exists() {
                CellReport {
                    config,
                    fold,
                    seed,
                    path,
                    steps: None,
                    final_ratio: None,
                }
            } else {
                let logs = run_cell(scenario, &plan, spec, config, fold, seed)?;
                let tmp = path.with_extension("csv.tmp");
                write_logs(&tmp, &logs)?;
                fs::rename(&tmp, &path).map_err(io_err(&path))?;
                CellReport {
                    config,
                    fold,
                    seed,
                    path,
                    steps: Some(logs.len()),
                    final_ratio: logs.last().map(|l| l.perf_ratio),
                }
            };
            progress(&report);
            Ok(report)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_names_round_trip() {
        let mut all = ConfigId::frugal_grid();
        all.push(ConfigId::Passive {
            timeout_predictor: false,
        });
        all.push(ConfigId::Passive {
            timeout_predictor: true,
        });
        let names: Vec<String> = all.iter().map(|c| c.to_string()).collect();
        assert_eq!(names[0], "uncertainty");
        assert_eq!(names[3], "uncertainty+to+dt");
        assert_eq!(names[6], "random+dt");
        assert_eq!(names[9], "passive+to");
        for (c, n) in all.iter().zip(&names) {
            assert_eq!(n.parse::<ConfigId>().unwrap(), *c);
        }
        for bad in ["", "unc", "random+dt+to", "passive+dt", "random+to+to"] {
            assert!(bad.parse::<ConfigId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = ExperimentSpec::standard("x");
        assert!(s.validate().is_ok());
        s.seeds = vec![1, 1];
        assert!(s.validate().is_err());
        s.seeds = vec![1];
        s.configs.clear();
        assert!(s.validate().is_err());
        s.configs = ConfigId::frugal_grid();
        s.folds = vec![10];
        assert!(s.validate().is_err());
    }

    #[test]
    fn ratio_edge_cases() {
        assert_eq!(ratio(2.0, 4.0), 0.5);
        assert_eq!(ratio(0.0, 0.0), 1.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
    }
}
