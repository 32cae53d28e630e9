use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::controller::{ControllerConfig, DynamicTimeoutController};
use super::oracle::{CostLedger, LedgerEntry, RunOracle};
use super::uncertainty::least_confidence;
use crate::aslib::Scenario;
use crate::forest::ForestConfig;
use crate::labels::LabelStore;
use crate::preprocess::{fit_imputer, Fold, PreprocessError};
use crate::seeds::derive_seed;
use crate::selector::{algorithm_pairs, evaluate_selector, retrain_ensemble, SelectorEnsemble, SelectorError, TrainingData};

const SAMPLING_STREAM: u64 = 1;
const FOREST_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionStrategy {
    Uncertainty,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub selection: SelectionStrategy,
    pub timeout_predictor: bool,
    pub dynamic_timeout: bool,
    /// (pair, instance) requests executed per step.
    pub batch_size: usize,
    /// Instances run on every algorithm before the first model is fit.
    pub initial_size: usize,
    pub seed: u64,
    /// Forest hyperparameters; the seed field is replaced per run.
    pub forest: ForestConfig,
    pub controller: ControllerConfig,
}

/// Requests per step for a training set of `n_train` instances: `ceil(frac * n_train)`, at least 1.
pub fn batch_size_for(n_train: usize, frac: f64) -> usize {
    ((frac * n_train as f64).ceil() as usize).max(1)
}

impl LoopConfig {
    /// Standard settings: batches of 1% of the training set and an initial
    /// set of one batch.
    pub fn new(
        n_train: usize,
        selection: SelectionStrategy,
        timeout_predictor: bool,
        dynamic_timeout: bool,
        seed: u64,
    ) -> Self {
        let n = batch_size_for(n_train, 0.01);
        LoopConfig {
            selection,
            timeout_predictor,
            dynamic_timeout,
            batch_size: n,
            initial_size: n,
            seed,
            forest: ForestConfig::default(),
            controller: ControllerConfig::default(),
        }
    }
}

/// Forest configuration used by every model of a run seeded with `seed`.
/// Passive baselines call this too, so that equal training data gives equal forests.
pub fn run_forest(forest: &ForestConfig, seed: u64) -> ForestConfig {
    forest.with_seed(derive_seed(seed, FOREST_STREAM))
}

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("initial set of {requested} instances exceeds the {available} training instances")]
    InitialSetTooLarge { requested: usize, available: usize },
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Selector(#[from] SelectorError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRequest {
    /// Index into the portfolio's pair list.
    pub pair_index: usize,
    pub pair: (usize, usize),
    pub instance: usize,
    /// Maximum posterior of the pair's model on the instance.
    pub confidence: f64,
}

/// Per-pair candidate instances, each list ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPool {
    pub pairs: Vec<(usize, usize)>,
    pub members: Vec<Vec<usize>>,
}

impl QueryPool {
    pub fn len(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.members.iter().all(Vec::is_empty)
    }
}

/// Values reported after each step; step 0 describes the initial set.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Run time limit in force during the step.
    pub timeout: f64,
    /// (pair, training instance) entries whose label is settled.
    pub labels: usize,
    pub cost: f64,
    pub test_par10: f64,
    pub validation_par10: f64,
}

pub struct LoopState<'a> {
    pub scenario: &'a Scenario,
    pub fold: &'a Fold,
    pub test: &'a [usize],
    pub cfg: LoopConfig,
    pub oracle: RunOracle<'a>,
    pub ledger: CostLedger,
    pub pools: QueryPool,
    pub ensemble: SelectorEnsemble,
    pub controller: DynamicTimeoutController,
    pub step: usize,
    forest: ForestConfig,
    imputer: crate::preprocess::ImputerModel,
    rows: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
}

/// A pair entry is finished once its label is decisive, or when both runs
/// are settled at the full cutoff so no rerun could ever decide it.
fn resolved(store: &LabelStore, pair: (usize, usize), i: usize, cap: f64) -> bool {
    match store.pair_label(i, pair.0, pair.1) {
        Ok(l) if l.is_decisive() => true,
        Ok(_) => store.get(i, pair.0).settled_at(cap) && store.get(i, pair.1).settled_at(cap),
        Err(_) => false,
    }
}

/// Whether executing the entry at `timeout` could change anything.
fn executable(store: &LabelStore, pair: (usize, usize), i: usize, timeout: f64) -> bool {
    !(store.get(i, pair.0).settled_at(timeout) && store.get(i, pair.1).settled_at(timeout))
}

impl<'a> LoopState<'a> {
    pub fn timeout(&self) -> f64 {
        self.controller.current
    }

    pub fn store(&self) -> &LabelStore {
        self.oracle.cache()
    }

    /// Settled (pair, instance) entries over the training set.
    pub fn labels(&self) -> usize {
        self.pools.pairs.len() * self.fold.train.len() - self.pools.len()
    }

    fn retrain(&mut self) -> Result<(), LoopError> {
        let data = TrainingData {
            scenario: self.scenario,
            rows: &self.rows,
            imputer: &self.imputer,
            train: &self.fold.train,
        };
        let level = self.cfg.timeout_predictor.then_some(self.controller.current);
        self.ensemble = retrain_ensemble(
            &data,
            self.oracle.cache(),
            &self.forest,
            level,
            Some(&self.ensemble),
        )?;
        Ok(())
    }

    fn run(&mut self, instance: usize, algorithm: usize) {
        let t = self.controller.current;
        if let Some(ex) = self.oracle.execute(instance, algorithm, t) {
            self.ledger.charge(LedgerEntry {
                step: self.step,
                instance,
                algorithm,
                charged: ex.charged,
                result: ex.observation,
            });
        }
    }

    /// Drops every finished entry of `instance` from the pools.
    fn prune(&mut self, instance: usize) {
        let cap = self.controller.cap;
        let store = self.oracle.cache();
        for (k, &pair) in self.pools.pairs.iter().enumerate() {
            let m = &mut self.pools.members[k];
            if let Ok(pos) = m.binary_search(&instance) {
                if resolved(store, pair, instance, cap) {
                    m.remove(pos);
                }
            }
        }
    }

    fn record(&self) -> StepRecord {
        StepRecord {
            step: self.step,
            timeout: self.controller.current,
            labels: self.labels(),
            cost: self.ledger.total(),
            test_par10: evaluate_selector(&self.ensemble, self.test, self.scenario),
            validation_par10: evaluate_selector(&self.ensemble, &self.fold.validation, self.scenario),
        }
    }

    fn executable_entries(&self) -> Vec<(usize, usize)> {
        let t = self.controller.current;
        let store = self.oracle.cache();
        let mut out = Vec::new();
        for (k, &pair) in self.pools.pairs.iter().enumerate() {
            for &i in &self.pools.members[k] {
                if executable(store, pair, i, t) {
                    out.push((k, i));
                }
            }
        }
        out
    }

    fn request(&self, k: usize, instance: usize) -> QueryRequest {
        QueryRequest {
            pair_index: k,
            pair: self.pools.pairs[k],
            instance,
            confidence: self.ensemble.pairwise[k].confidence(&self.rows[instance]),
        }
    }
}

/// Chooses and runs the initial set, builds the pools and fits the first ensemble.
pub fn init_loop<'a>(
    scenario: &'a Scenario,
    fold: &'a Fold,
    test: &'a [usize],
    cfg: &LoopConfig,
) -> Result<LoopState<'a>, LoopError> {
    if cfg.batch_size == 0 {
        return Err(LoopError::EmptyBatch);
    }
    let n_train = fold.train.len();
    if cfg.initial_size > n_train || cfg.initial_size == 0 {
        return Err(LoopError::InitialSetTooLarge {
            requested: cfg.initial_size,
            available: n_train,
        });
    }
    let imputer = fit_imputer(scenario, &fold.train)?;
    let rows: Vec<Vec<f64>> = scenario.feature_values.iter().map(|r| imputer.apply(r)).collect();
    let controller = if cfg.dynamic_timeout {
        DynamicTimeoutController::new(&cfg.controller, scenario.cutoff)
    } else {
        DynamicTimeoutController::fixed(scenario.cutoff)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, SAMPLING_STREAM));
    let mut initial: Vec<usize> = index::sample(&mut rng, n_train, cfg.initial_size)
        .into_iter()
        .map(|j| fold.train[j])
        .collect();
    initial.sort_unstable();

    let pairs = algorithm_pairs(scenario.n_algorithms());
    let mut state = LoopState {
        scenario,
        fold,
        test,
        cfg: cfg.clone(),
        oracle: RunOracle::new(scenario),
        ledger: CostLedger::default(),
        pools: QueryPool {
            members: vec![Vec::new(); pairs.len()],
            pairs,
        },
        ensemble: SelectorEnsemble {
            n_algorithms: scenario.n_algorithms(),
            pairwise: Vec::new(),
            timeout_models: None,
            imputer: imputer.clone(),
        },
        controller,
        step: 0,
        forest: run_forest(&cfg.forest, cfg.seed),
        imputer,
        rows,
        rng,
    };

    for &i in &initial {
        for a in 0..scenario.n_algorithms() {
            state.run(i, a);
        }
    }
    // Initial instances are already labelled; they stay candidates only
    // while a longer timeout could still decide them.
    let cap = state.controller.cap;
    for (k, &pair) in state.pools.pairs.iter().enumerate() {
        state.pools.members[k] = fold
            .train
            .iter()
            .copied()
            .filter(|&i| initial.binary_search(&i).is_err() || !resolved(state.oracle.cache(), pair, i, cap))
            .collect();
    }
    let data = TrainingData {
        scenario,
        rows: &state.rows,
        imputer: &state.imputer,
        train: &fold.train,
    };
    let level = cfg.timeout_predictor.then_some(state.controller.current);
    state.ensemble = retrain_ensemble(&data, state.oracle.cache(), &state.forest, level, None)?;
    Ok(state)
}

/// The `n` least confident executable pool entries across all pairs.
/// Ties keep pair order, then instance order.
pub fn select_queries_uncertainty(state: &LoopState<'_>, n: usize) -> Vec<QueryRequest> {
    let mut reqs: Vec<QueryRequest> = state
        .executable_entries()
        .into_iter()
        .map(|(k, i)| state.request(k, i))
        .collect();
    let score = |r: &QueryRequest| least_confidence(&[r.confidence, 1.0 - r.confidence]);
    reqs.sort_by(|a, b| score(b).total_cmp(&score(a)));
    reqs.truncate(n);
    reqs
}

/// `n` executable pool entries drawn uniformly without replacement.
pub fn select_queries_random(state: &mut LoopState<'_>, n: usize) -> Vec<QueryRequest> {
    let entries = state.executable_entries();
    let mut picked = index::sample(&mut state.rng, entries.len(), n.min(entries.len())).into_vec();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|j| state.request(entries[j].0, entries[j].1))
        .collect()
}

/// Runs both algorithms of the request at the current timeout where the
/// cache cannot already answer, then retires finished pool entries.
pub fn execute_request(state: &mut LoopState<'_>, req: &QueryRequest) {
    state.run(req.instance, req.pair.0);
    state.run(req.instance, req.pair.1);
    state.prune(req.instance);
}

/// One select/execute/retrain/evaluate round. `None` once the pools are empty.
pub fn advance(state: &mut LoopState<'_>) -> Result<Option<StepRecord>, LoopError> {
    loop {
        if state.pools.is_empty() {
            return Ok(None);
        }
        let n = state.cfg.batch_size;
        let reqs = match state.cfg.selection {
            SelectionStrategy::Uncertainty => select_queries_uncertainty(state, n),
            SelectionStrategy::Random => select_queries_random(state, n),
        };
        if reqs.is_empty() {
            // Every remaining entry needs a longer limit than the current one.
            if state.controller.at_cap() {
                unreachable!("entries settled at the cutoff are always resolved");
            }
            state.controller.increase();
            continue;
        }
        state.step += 1;
        let timeout = state.controller.current;
        for r in &reqs {
            execute_request(state, r);
        }
        state.retrain()?;
        let mut rec = state.record();
        rec.timeout = timeout;
        if state.cfg.dynamic_timeout {
            state.controller.maybe_increase_timeout(rec.validation_par10);
        }
        return Ok(Some(rec));
    }
}

/// Runs the loop from the initial set until every pool is exhausted.
pub fn run_loop(
    scenario: &Scenario,
    fold: &Fold,
    test: &[usize],
    cfg: &LoopConfig,
) -> Result<Vec<StepRecord>, LoopError> {
    let mut state = init_loop(scenario, fold, test, cfg)?;
    let mut steps = vec![state.record()];
    while let Some(rec) = advance(&mut state)? {
        steps.push(rec);
    }
    Ok(steps)
}
