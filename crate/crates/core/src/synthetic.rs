//! Generated scenarios with a known structure, for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aslib::{RunRecord, RunStatus, Scenario};

/// A portfolio where feature `x0` alone picks the fastest algorithm.
///
/// `x0` is uniform on `[0, n_algorithms)` and algorithm `floor(x0)` runs in
/// `fast` seconds. Every other algorithm times out with probability
/// `timeout_prob`, otherwise it runs in `slow` seconds. The remaining
/// features are uniform noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_instances: usize,
    pub n_algorithms: usize,
    pub n_noise_features: usize,
    pub cutoff: f64,
    pub fast: (f64, f64),
    pub slow: (f64, f64),
    pub timeout_prob: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// 200 instances, 3 algorithms, cutoff 100 s; about 30% of all runs time out.
    pub fn frugality(seed: u64) -> Self {
        SyntheticSpec {
            n_instances: 200,
            n_algorithms: 3,
            n_noise_features: 3,
            cutoff: 100.0,
            fast: (1.0, 5.0),
            slow: (20.0, 90.0),
            timeout_prob: 0.45,
            seed,
        }
    }

    /// The same structure with 60 instances.
    pub fn small(seed: u64) -> Self {
        SyntheticSpec {
            n_instances: 60,
            ..Self::frugality(seed)
        }
    }

    pub fn generate(&self) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let m = self.n_algorithms;
        let mut features = Vec::with_capacity(self.n_instances);
        let mut runs = Vec::with_capacity(self.n_instances);
        for _ in 0..self.n_instances {
            let x0: f64 = rng.gen_range(0.0..m as f64);
            let best = (x0 as usize).min(m - 1);
            let mut row = vec![Some(x0)];
            row.extend((0..self.n_noise_features).map(|_| Some(rng.gen_range(0.0..1.0))));
            features.push(row);
            runs.push(
                (0..m)
                    .map(|a| {
                        if a == best {
                            RunRecord {
                                runtime: rng.gen_range(self.fast.0..self.fast.1),
                                status: RunStatus::Ok,
                            }
                        } else if rng.gen_bool(self.timeout_prob) {
                            RunRecord {
                                runtime: self.cutoff,
                                status: RunStatus::Timeout,
                            }
                        } else {
                            RunRecord {
                                runtime: rng.gen_range(self.slow.0..self.slow.1),
                                status: RunStatus::Ok,
                            }
                        }
                    })
                    .collect(),
            );
        }
        let mut names = vec!["x0".to_string()];
        names.extend((1..=self.n_noise_features).map(|k| format!("noise{k}")));
        Scenario::new(
            format!("synthetic-{}x{}-{}", self.n_instances, m, self.seed),
            (0..m).map(|a| format!("algo{a}")).collect(),
            names,
            (0..self.n_instances).map(|i| format!("inst{i:04}")).collect(),
            features,
            runs,
            self.cutoff,
        )
        .expect("generated scenario is well formed")
    }
}

/// Two algorithms split by a threshold on feature 0: algorithm 0 is faster
/// below 0.5 and algorithm 1 above. Feature 1 is noise. Nothing times out.
pub fn threshold_pair(n_instances: usize, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n_instances);
    let mut runs = Vec::with_capacity(n_instances);
    for _ in 0..n_instances {
        let x: f64 = rng.gen_range(0.0..1.0);
        let fast = RunRecord {
            runtime: rng.gen_range(1.0..5.0),
            status: RunStatus::Ok,
        };
        let slow = RunRecord {
            runtime: rng.gen_range(10.0..50.0),
            status: RunStatus::Ok,
        };
        features.push(vec![Some(x), Some(rng.gen_range(0.0..1.0))]);
        runs.push(if x < 0.5 { vec![fast, slow] } else { vec![slow, fast] });
    }
    Scenario::new(
        format!("threshold-{n_instances}-{seed}"),
        vec!["low".into(), "high".into()],
        vec!["x".into(), "noise".into()],
        (0..n_instances).map(|i| format!("inst{i:04}")).collect(),
        features,
        runs,
        100.0,
    )
    .expect("generated scenario is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frugality_shape_and_timeout_rate() {
        let s = SyntheticSpec::frugality(11).generate();
        assert_eq!((s.n_instances(), s.n_algorithms(), s.n_features()), (200, 3, 4));
        let timeouts = (0..200)
            .flat_map(|i| s.runs_of(i).iter())
            .filter(|r| r.status == RunStatus::Timeout)
            .count();
        // expectation is 2/3 * 0.45 = 30% of 600 runs
        assert!((140..=220).contains(&timeouts), "{timeouts}");
    }

    #[test]
    fn feature_zero_names_the_fastest() {
        let s = SyntheticSpec::small(2).generate();
        for i in 0..s.n_instances() {
            let x0 = s.feature_values[i][0].unwrap();
            let best = (0..3)
                .min_by(|&a, &b| s.capped_runtime(i, a).total_cmp(&s.capped_runtime(i, b)))
                .unwrap();
            assert_eq!(best, x0 as usize);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(SyntheticSpec::small(5).generate(), SyntheticSpec::small(5).generate());
        assert_eq!(threshold_pair(30, 1), threshold_pair(30, 1));
    }
}
