//! Frugal algorithm selection: pairwise runtime-comparison forests trained
//! by cost-aware active learning over recorded ASLib solver runs.
//!
//! The crate is organised bottom-up:
//!
//! - [`aslib`]: ARFF and scenario-directory ingestion, descriptive statistics.
//! - [`preprocess`]: feature filtering, median imputation, PAR10, splits.
//! - [`forest`]: the random-forest binary classifier.
//! - [`labels`] and [`selector`]: observations, pairwise labels, voting.
//! - [`frugal`]: the active-learning loop with timeout control.
//! - [`harness`]: passive baselines, experiment grids, curves and plots.
//! - [`synthetic`]: generated scenarios for tests and benchmarks.

pub mod aslib;
pub mod forest;
pub mod frugal;
pub mod harness;
pub mod labels;
pub mod preprocess;
pub mod seeds;
pub mod selector;
pub mod synthetic;

pub use aslib::{load_scenario, scenario_stats, RunRecord, RunStatus, Scenario, ScenarioStats};
pub use forest::{ForestConfig, ProbabilityEstimate, RandomForest};
pub use frugal::{run_loop, LoopConfig, SelectionStrategy, StepRecord};
pub use harness::{ConfigId, ExperimentSpec, StepLog};
pub use labels::{LabelStore, Observation, PairLabel};
pub use preprocess::{par10, SplitPlan};
pub use selector::SelectorEnsemble;
