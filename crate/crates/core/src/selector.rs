//! Pairwise one-vs-one algorithm selection with voting and optional
//! timeout-predictor filtering.

use std::sync::Arc;

use thiserror::Error;

use crate::aslib::Scenario;
use crate::forest::{ForestConfig, ForestError, RandomForest};
use crate::labels::{timeout_label, LabelStore};
use crate::preprocess::{par10, ImputerModel};
use crate::seeds::derive_seed;

/// Confidence reported by a model that has no training data.
pub const ABSTAIN_CONFIDENCE: f64 = 0.5;
/// An algorithm is predicted to time out when its timeout model's class-1
/// probability exceeds this value.
pub const TIMEOUT_THRESHOLD: f64 = 0.5;

const TIMEOUT_SEED_STREAM: u64 = 1 << 32;

#[derive(Debug, Error)]
pub enum SelectorError {
    #[error("no observations on any training instance")]
    NoLabelledData,
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// All unordered algorithm pairs `(a, b)` with `a < b`, in portfolio order.
pub fn algorithm_pairs(n_algorithms: usize) -> Vec<(usize, usize)> {
    (0..n_algorithms)
        .flat_map(|a| (a + 1..n_algorithms).map(move |b| (a, b)))
        .collect()
}

/// Predicts which of `pair` is faster. Class 0: the first algorithm, class 1: the second.
#[derive(Debug, Clone)]
pub struct PairwiseModel {
    pub pair: (usize, usize),
    /// `None` when no decisive label was available; such a model abstains.
    pub model: Option<Arc<RandomForest>>,
    /// `(instance, class)` rows the model was fit on, in fit order.
    pub trained_on: Vec<(usize, bool)>,
}

impl PairwiseModel {
    pub fn confidence(&self, row: &[f64]) -> f64 {
        match &self.model {
            Some(m) => m
                .predict_proba(row)
                .map(|p| p.confidence())
                .expect("row width fixed by the imputer"),
            None => ABSTAIN_CONFIDENCE,
        }
    }

    /// The predicted faster algorithm, or `None` for an abstaining model.
    pub fn winner(&self, row: &[f64]) -> Option<usize> {
        let m = self.model.as_ref()?;
        let second = m
            .predict_label(row)
            .expect("row width fixed by the imputer");
        Some(if second { self.pair.1 } else { self.pair.0 })
    }
}

/// Predicts whether `algorithm` fails to finish within `trained_at` seconds (class 1).
#[derive(Debug, Clone)]
pub struct TimeoutModel {
    pub algorithm: usize,
    pub trained_at: f64,
    pub model: Option<Arc<RandomForest>>,
    pub trained_on: Vec<(usize, bool)>,
}

impl TimeoutModel {
    pub fn predicts_timeout(&self, row: &[f64]) -> bool {
        self.model.as_ref().is_some_and(|m| {
            m.predict_proba(row)
                .expect("row width fixed by the imputer")
                .p_class1
                > TIMEOUT_THRESHOLD
        })
    }
}

#[derive(Debug, Clone)]
pub struct SelectorEnsemble {
    pub n_algorithms: usize,
    pub pairwise: Vec<PairwiseModel>,
    pub timeout_models: Option<Vec<TimeoutModel>>,
    pub imputer: ImputerModel,
}

/// Inputs shared by every training call within one experiment run.
pub struct TrainingData<'a> {
    pub scenario: &'a Scenario,
    /// Imputed feature rows for every scenario instance.
    pub rows: &'a [Vec<f64>],
    pub imputer: &'a ImputerModel,
    pub train: &'a [usize],
}

/// A fitted (or absent) model together with the rows it saw.
type PriorFit<'p> = (&'p Option<Arc<RandomForest>>, &'p [(usize, bool)]);

/// Fits a forest on `(instance, class)` rows, or reuses `previous` when it
/// was fit on exactly the same rows with the same seed.
fn fit_or_reuse(
    data: &TrainingData<'_>,
    config: &ForestConfig,
    rows: &[(usize, bool)],
    previous: Option<PriorFit<'_>>,
) -> Result<Option<Arc<RandomForest>>, ForestError> {
    if rows.is_empty() {
        return Ok(None);
    }
    if let Some((Some(model), prev_rows)) = previous {
        if prev_rows == rows && model.config == *config {
            return Ok(Some(Arc::clone(model)));
        }
    }
    let x: Vec<Vec<f64>> = rows.iter().map(|&(i, _)| data.rows[i].clone()).collect();
    let y: Vec<bool> = rows.iter().map(|&(_, c)| c).collect();
    RandomForest::fit(config, &x, &y).map(|f| Some(Arc::new(f)))
}

/// Fits one forest per algorithm pair on the decisively labelled training
/// instances, and with `timeout_level = Some(t)` one timeout forest per
/// algorithm labelled relative to `t`. Rows enter every forest in the order
/// of `data.train`.
pub fn train_ensemble(
    data: &TrainingData<'_>,
    store: &LabelStore,
    forest: &ForestConfig,
    timeout_level: Option<f64>,
) -> Result<SelectorEnsemble, SelectorError> {
    retrain_ensemble(data, store, forest, timeout_level, None)
}

/// As [`train_ensemble`], reusing any model of `previous` whose training
/// rows are unchanged. The result is identical to a fresh fit.
pub fn retrain_ensemble(
    data: &TrainingData<'_>,
    store: &LabelStore,
    forest: &ForestConfig,
    timeout_level: Option<f64>,
    previous: Option<&SelectorEnsemble>,
) -> Result<SelectorEnsemble, SelectorError> {
    if !data.train.iter().any(|&i| store.is_observed(i)) {
        return Err(SelectorError::NoLabelledData);
    }
    let n = data.scenario.n_algorithms();
    let mut pairwise = Vec::new();
    for (k, pair) in algorithm_pairs(n).into_iter().enumerate() {
        let rows: Vec<(usize, bool)> = data
            .train
            .iter()
            .filter_map(|&i| {
                let label = store.pair_label(i, pair.0, pair.1).ok()?;
                label.as_class().map(|c| (i, c))
            })
            .collect();
        let prev = previous.map(|p| (&p.pairwise[k].model, p.pairwise[k].trained_on.as_slice()));
        let config = forest.with_seed(derive_seed(forest.seed, k as u64));
        let model = fit_or_reuse(data, &config, &rows, prev)?;
        pairwise.push(PairwiseModel {
            pair,
            model,
            trained_on: rows,
        });
    }

    let timeout_models = match timeout_level {
        None => None,
        Some(level) => {
            let mut models = Vec::with_capacity(n);
            for a in 0..n {
                let rows: Vec<(usize, bool)> = data
                    .train
                    .iter()
                    .filter_map(|&i| timeout_label(store.get(i, a), level).map(|c| (i, c)))
                    .collect();
                let prev = previous
                    .and_then(|p| p.timeout_models.as_ref())
                    .map(|m| (&m[a].model, m[a].trained_on.as_slice()));
                let config = forest.with_seed(derive_seed(forest.seed, TIMEOUT_SEED_STREAM + a as u64));
                let model = fit_or_reuse(data, &config, &rows, prev)?;
                models.push(TimeoutModel {
                    algorithm: a,
                    trained_at: level,
                    model,
                    trained_on: rows,
                });
            }
            Some(models)
        }
    };

    Ok(SelectorEnsemble {
        n_algorithms: n,
        pairwise,
        timeout_models,
        imputer: data.imputer.clone(),
    })
}

impl SelectorEnsemble {
    /// Algorithms still in the running: everything not predicted to time
    /// out, or the whole portfolio when every algorithm is.
    pub fn candidates(&self, row: &[f64]) -> Vec<bool> {
        let Some(models) = &self.timeout_models else {
            return vec![true; self.n_algorithms];
        };
        let keep: Vec<bool> = models.iter().map(|m| !m.predicts_timeout(row)).collect();
        if keep.iter().any(|&k| k) {
            keep
        } else {
            vec![true; self.n_algorithms]
        }
    }

    /// One vote per trained pairwise model whose two algorithms are both candidates.
    pub fn votes(&self, row: &[f64], candidates: &[bool]) -> Vec<usize> {
        let mut votes = vec![0; self.n_algorithms];
        for m in &self.pairwise {
            if candidates[m.pair.0] && candidates[m.pair.1] {
                if let Some(w) = m.winner(row) {
                    votes[w] += 1;
                }
            }
        }
        votes
    }

    /// Selection on an already imputed row.
    pub fn select_dense(&self, row: &[f64]) -> usize {
        let candidates = self.candidates(row);
        let votes = self.votes(row, &candidates);
        let mut best = None;
        for a in 0..self.n_algorithms {
            if candidates[a] && best.is_none_or(|b: usize| votes[a] > votes[b]) {
                best = Some(a);
            }
        }
        best.expect("candidate set is never empty")
    }

    /// Imputes a raw feature row and returns the selected algorithm index.
    pub fn select_algorithm(&self, raw: &[Option<f64>]) -> usize {
        self.select_dense(&self.imputer.apply(raw))
    }
}

/// Total PAR10 of the selector's choices on `instances`.
pub fn evaluate_selector(e: &SelectorEnsemble, instances: &[usize], scenario: &Scenario) -> f64 {
    instances
        .iter()
        .map(|&i| {
            let a = e.select_algorithm(&scenario.feature_values[i]);
            let r = scenario.run(i, a);
            par10(r.runtime, r.status, scenario.cutoff)
        })
        .sum()
}
