//! Random-forest binary classifier grown from scratch.
//!
//! Trees are fit on bootstrap resamples with Gini splits over a random
//! subset of `floor(sqrt(d))` features per node. The forest's confidence in
//! a class is the fraction of trees whose reached leaf has that class as its
//! majority (ties count for class 0).
//!
//! # Dump format
//!
//! [`RandomForest::dump`] writes a line-oriented text form:
//!
//! ```text
//! forest trees=<n> features=<d>
//! tree <t> nodes=<m>
//! node <id> split <feature> <threshold> <left id> <right id>
//! node <id> leaf <class-0 count> <class-1 count>
//! ```
//!
//! Node ids are local to their tree, node 0 is the root, and a row goes
//! left when `row[feature] <= threshold`. Thresholds are printed with the
//! shortest representation that parses back to the same `f64`.

mod tree;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use tree::{gini, DecisionTree, Node};
use tree::TreeParams;

use crate::seeds::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    Sqrt,
    All,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            max_depth: 1 << 31,
            min_samples_split: 2,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        ForestConfig {
            seed,
            ..self.clone()
        }
    }

    fn features_per_split(&self, n_features: usize) -> usize {
        let k = match self.max_features {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, n_features.max(1)).min(n_features)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForestError {
    #[error("cannot fit a forest on zero rows")]
    NoRows,
    #[error("{rows} rows but {labels} labels")]
    LabelCount { rows: usize, labels: usize },
    #[error("row {0} has a different length from row 0")]
    Ragged(usize),
    #[error("row {0} contains a missing or non-finite value")]
    NonFinite(usize),
    #[error("row has {found} features, forest expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid forest configuration: {0}")]
    InvalidConfig(String),
}

/// Posterior estimate for the two classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityEstimate {
    pub p_class0: f64,
    pub p_class1: f64,
}

impl ProbabilityEstimate {
    /// The maximum posterior probability.
    pub fn confidence(&self) -> f64 {
        self.p_class0.max(self.p_class1)
    }

    /// `true` for class 1; an exact tie goes to class 0.
    pub fn label(&self) -> bool {
        self.p_class1 > self.p_class0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub trees: Vec<DecisionTree>,
    pub n_features: usize,
}

fn validate(rows: &[Vec<f64>], labels: &[bool]) -> Result<usize, ForestError> {
    if rows.is_empty() {
        return Err(ForestError::NoRows);
    }
    if rows.len() != labels.len() {
        return Err(ForestError::LabelCount {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let d = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(ForestError::Ragged(i));
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(ForestError::NonFinite(i));
        }
    }
    Ok(d)
}

impl RandomForest {
    /// Fits `config.n_trees` trees. Tree `t` draws from its own generator
    /// seeded from `(config.seed, t)`, so the result does not depend on how
    /// the work is scheduled across threads.
    pub fn fit(config: &ForestConfig, rows: &[Vec<f64>], labels: &[bool]) -> Result<Self, ForestError> {
        if config.n_trees == 0 {
            return Err(ForestError::InvalidConfig("n_trees must be at least 1".into()));
        }
        if let MaxFeatures::Fixed(0) = config.max_features {
            return Err(ForestError::InvalidConfig("max_features must be at least 1".into()));
        }
        let d = validate(rows, labels)?;
        let params = TreeParams {
            max_features: config.features_per_split(d),
            max_depth: config.max_depth,
            min_samples_split: config.min_samples_split,
        };
        let n = rows.len();
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, t as u64));
                let samples: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(rows, labels, samples, &params, &mut rng)
            })
            .collect();
        Ok(RandomForest {
            config: config.clone(),
            trees,
            n_features: d,
        })
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<ProbabilityEstimate, ForestError> {
        if row.len() != self.n_features {
            return Err(ForestError::DimensionMismatch {
                expected: self.n_features,
                found: row.len(),
            });
        }
        let n = self.trees.len();
        let ones = self.trees.iter().filter(|t| t.vote(row)).count();
        Ok(ProbabilityEstimate {
            p_class0: (n - ones) as f64 / n as f64,
            p_class1: ones as f64 / n as f64,
        })
    }

    pub fn predict_label(&self, row: &[f64]) -> Result<bool, ForestError> {
        self.predict_proba(row).map(|p| p.label())
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "forest trees={} features={}", self.trees.len(), self.n_features);
        for (t, tree) in self.trees.iter().enumerate() {
            let _ = writeln!(out, "tree {t} nodes={}", tree.nodes.len());
            for (id, node) in tree.nodes.iter().enumerate() {
                let _ = match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => writeln!(out, "node {id} split {feature} {threshold} {left} {right}"),
                    Node::Leaf { counts } => {
                        writeln!(out, "node {id} leaf {} {}", counts[0], counts[1])
                    }
                };
            }
        }
        out
    }
}
