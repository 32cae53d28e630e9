//! Feature filtering and median imputation, PAR10 scoring and the
//! test / fold / validation split protocol.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aslib::{RunStatus, Scenario};

/// Features missing on more than this fraction of training instances are dropped.
pub const MAX_MISSING_RATE: f64 = 0.20;
pub const PAR_FACTOR: f64 = 10.0;
pub const N_FOLDS: usize = 10;
pub const MIN_INSTANCES: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreprocessError {
    #[error("no training instances")]
    EmptyTraining,
    #[error("every feature exceeds the missing-value threshold")]
    AllFeaturesDropped,
    #[error("{0} instances are too few for the split protocol (need at least {MIN_INSTANCES})")]
    TooFewInstances(usize),
}

/// Penalised runtime: unsolved runs score ten times the cutoff.
pub fn par10(runtime: f64, status: RunStatus, cutoff: f64) -> f64 {
    match status {
        RunStatus::Ok => runtime,
        _ => PAR_FACTOR * cutoff,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputerModel {
    /// Indices into the scenario feature list, ascending.
    pub kept: Vec<usize>,
    pub kept_names: Vec<String>,
    pub medians: Vec<f64>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn fit_imputer(scenario: &Scenario, train: &[usize]) -> Result<ImputerModel, PreprocessError> {
    if train.is_empty() {
        return Err(PreprocessError::EmptyTraining);
    }
    let n = train.len();
    let mut kept = Vec::new();
    let mut medians = Vec::new();
    for f in 0..scenario.n_features() {
        let mut present: Vec<f64> = train
            .iter()
            .filter_map(|&i| scenario.feature_values[i][f])
            .collect();
        let missing = n - present.len();
        // missing / n > 0.20, in integers
        if missing * 5 > n || present.is_empty() {
            continue;
        }
        kept.push(f);
        medians.push(median(&mut present));
    }
    if kept.is_empty() {
        return Err(PreprocessError::AllFeaturesDropped);
    }
    Ok(ImputerModel {
        kept_names: kept.iter().map(|&f| scenario.features[f].clone()).collect(),
        kept,
        medians,
    })
}

impl ImputerModel {
    /// Projects a full feature row onto the kept features, filling gaps with medians.
    pub fn apply(&self, row: &[Option<f64>]) -> Vec<f64> {
        self.kept
            .iter()
            .zip(&self.medians)
            .map(|(&f, &m)| row[f].unwrap_or(m))
            .collect()
    }

    pub fn n_outputs(&self) -> usize {
        self.kept.len()
    }
}

pub fn apply_imputer(model: &ImputerModel, row: &[Option<f64>]) -> Vec<f64> {
    model.apply(row)
}

/// One cross-validation fold: instance indices, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub seed: u64,
    pub test: Vec<usize>,
    pub folds: Vec<Fold>,
}

fn tenth(n: usize) -> usize {
    (n + 5) / 10
}

/// Shuffles the instances with `seed`, holds out a tenth as the shared test
/// set and builds ten folds over the remainder. Fold `k` validates on a
/// window of `round(|remainder| / 10)` instances starting at `k / 10` of the
/// way through the shuffled remainder; the rest of the remainder trains.
pub fn make_splits(scenario: &Scenario, seed: u64) -> Result<SplitPlan, PreprocessError> {
    let n = scenario.n_instances();
    if n < MIN_INSTANCES {
        return Err(PreprocessError::TooFewInstances(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = tenth(n);
    let mut test = order[..n_test].to_vec();
    test.sort_unstable();
    let rest = &order[n_test..];
    let r = rest.len();
    let n_val = tenth(r);
    let folds = (0..N_FOLDS)
        .map(|k| {
            let start = k * r / N_FOLDS;
            let mut in_val = vec![false; r];
            for j in 0..n_val {
                in_val[(start + j) % r] = true;
            }
            let mut train = Vec::with_capacity(r - n_val);
            let mut validation = Vec::with_capacity(n_val);
            for (pos, &i) in rest.iter().enumerate() {
                if in_val[pos] {
                    validation.push(i);
                } else {
                    train.push(i);
                }
            }
            train.sort_unstable();
            validation.sort_unstable();
            Fold { train, validation }
        })
        .collect();
    Ok(SplitPlan { seed, test, folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aslib::RunRecord;

    fn scenario_with(features: Vec<Vec<Option<f64>>>) -> Scenario {
        let n = features.len();
        let nf = features.first().map_or(0, Vec::len);
        let ok = RunRecord {
            runtime: 1.0,
            status: RunStatus::Ok,
        };
        Scenario::new(
            "t",
            vec!["a".into(), "b".into()],
            (0..nf).map(|f| format!("f{f}")).collect(),
            (0..n).map(|i| format!("i{i}")).collect(),
            features,
            vec![vec![ok, ok]; n],
            10.0,
        )
        .unwrap()
    }

    /// Ten rows, four features with 0, 1, 2 and 3 missing values.
    fn four_feature_fixture() -> Scenario {
        let rows = (0..10)
            .map(|i| {
                let v = i as f64;
                vec![
                    Some(v),
                    if i < 1 { None } else { Some(10.0 + v) },
                    if i < 2 { None } else { Some(100.0 - v) },
                    if i < 3 { None } else { Some(-v) },
                ]
            })
            .collect();
        scenario_with(rows)
    }

    #[test]
    fn missing_rate_boundary() {
        let s = four_feature_fixture();
        let train: Vec<usize> = (0..10).collect();
        let m = fit_imputer(&s, &train).unwrap();
        // 0%, 10%, 20% kept; 30% dropped
        assert_eq!(m.kept, vec![0, 1, 2]);
        // medians: f0 over 0..9 -> 4.5; f1 over 11..19 -> 15; f2 over 91..98 -> 94.5
        assert_eq!(m.medians, vec![4.5, 15.0, 94.5]);
    }

    #[test]
    fn apply_mixed_row() {
        let s = four_feature_fixture();
        let m = fit_imputer(&s, &(0..10).collect::<Vec<_>>()).unwrap();
        let row = [None, Some(7.0), None, Some(3.0)];
        assert_eq!(m.apply(&row), vec![4.5, 7.0, 94.5]);
        assert_eq!(m.apply(&[None; 4]), m.medians);
        let dense = [Some(1.0), Some(2.0), Some(3.0), Some(4.0)];
        assert_eq!(apply_imputer(&m, &dense), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn median_skips_missing_and_averages_middle_pair() {
        let vals = [Some(1.0), None, Some(3.0)];
        let mut present: Vec<f64> = vals.iter().flatten().copied().collect();
        assert_eq!(median(&mut present), 2.0);
        let s = scenario_with(
            (0..10)
                .map(|i| vec![if i == 1 { None } else if i % 2 == 0 { Some(1.0) } else { Some(3.0) }])
                .collect(),
        );
        let m = fit_imputer(&s, &(0..10).collect::<Vec<_>>()).unwrap();
        // five 1s and four 3s
        assert_eq!(m.medians, vec![1.0]);
        let m = fit_imputer(&s, &[0, 2, 3, 4, 5]).unwrap();
        // {1, 1, 3, 1, 3}
        assert_eq!(m.medians, vec![1.0]);
        let m = fit_imputer(&s, &[0, 3, 4, 5]).unwrap();
        // {1, 3, 1, 3} -> mean of middle pair
        assert_eq!(m.medians, vec![2.0]);
    }

    #[test]
    fn fit_errors() {
        let s = scenario_with(vec![vec![None]; 4]);
        assert_eq!(fit_imputer(&s, &[0, 1]), Err(PreprocessError::AllFeaturesDropped));
        assert_eq!(fit_imputer(&s, &[]), Err(PreprocessError::EmptyTraining));
    }

    #[test]
    fn par10_values() {
        assert_eq!(par10(12.5, RunStatus::Ok, 3600.0), 12.5);
        assert_eq!(par10(3600.0, RunStatus::Timeout, 3600.0), 36000.0);
        assert_eq!(par10(3.0, RunStatus::OtherFailure, 100.0), 1000.0);
        let total = par10(10.0, RunStatus::Ok, 100.0)
            + par10(100.0, RunStatus::Timeout, 100.0)
            + par10(90.0, RunStatus::Ok, 100.0);
        assert_eq!(total, 1100.0);
    }

    fn n_instances(n: usize) -> Scenario {
        scenario_with((0..n).map(|i| vec![Some(i as f64)]).collect())
    }

    #[test]
    fn split_sizes_for_100() {
        let plan = make_splits(&n_instances(100), 7).unwrap();
        assert_eq!(plan.test.len(), 10);
        assert_eq!(plan.folds.len(), 10);
        for fold in &plan.folds {
            assert_eq!(fold.train.len() + fold.validation.len(), 90);
            assert_eq!(fold.validation.len(), 9);
        }
        // with |remainder| divisible by ten the validation windows partition it
        let mut all: Vec<usize> = plan.folds.iter().flat_map(|f| f.validation.clone()).collect();
        all.extend(&plan.test);
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn splits_are_deterministic_and_seed_dependent() {
        let s = n_instances(100);
        assert_eq!(make_splits(&s, 1).unwrap(), make_splits(&s, 1).unwrap());
        assert_ne!(make_splits(&s, 1).unwrap().test, make_splits(&s, 2).unwrap().test);
    }

    #[test]
    fn too_few_instances() {
        assert_eq!(
            make_splits(&n_instances(19), 0),
            Err(PreprocessError::TooFewInstances(19))
        );
        assert!(make_splits(&n_instances(20), 0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn folds_partition_instances(n in 20usize..300, seed in any::<u64>()) {
                let plan = make_splits(&n_instances(n), seed).unwrap();
                prop_assert_eq!(plan.test.len(), (n + 5) / 10);
                let r = n - plan.test.len();
                for fold in &plan.folds {
                    prop_assert_eq!(fold.validation.len(), (r + 5) / 10);
                    let mut seen = vec![0u8; n];
                    for &i in plan.test.iter().chain(&fold.train).chain(&fold.validation) {
                        seen[i] += 1;
                    }
                    prop_assert!(seen.iter().all(|&c| c == 1));
                }
            }

            #[test]
            fn par10_bounds(rt in 0.0f64..1e4, cutoff in 1e-3f64..1e4, ok in any::<bool>()) {
                let status = if ok && rt <= cutoff { RunStatus::Ok } else { RunStatus::Timeout };
                let p = par10(rt, status, cutoff);
                prop_assert!(p >= rt.min(cutoff));
                prop_assert_eq!(p == PAR_FACTOR * cutoff, status != RunStatus::Ok || rt == PAR_FACTOR * cutoff);
            }

            #[test]
            fn imputation_is_idempotent(
                rows in prop::collection::vec(prop::collection::vec(prop::option::weighted(0.9, -1e3f64..1e3), 4), 5..30),
                probe in prop::collection::vec(prop::option::of(-1e3f64..1e3), 4),
            ) {
                let s = scenario_with(rows);
                let train: Vec<usize> = (0..s.n_instances()).collect();
                if let Ok(m) = fit_imputer(&s, &train) {
                    let once = m.apply(&probe);
                    let mut reinflated = vec![None; 4];
                    for (&f, &v) in m.kept.iter().zip(&once) {
                        reinflated[f] = Some(v);
                    }
                    prop_assert_eq!(m.apply(&reinflated), once);
                }
            }
        }
    }
}
