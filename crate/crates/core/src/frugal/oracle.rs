use crate::aslib::{RunStatus, Scenario};
use crate::labels::{LabelStore, Observation};

/// Replays recorded runs as if executing the solvers, keeping the best
/// observation per (instance, algorithm).
#[derive(Debug, Clone)]
pub struct RunOracle<'a> {
    scenario: &'a Scenario,
    cache: LabelStore,
}

/// Outcome of one simulated execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Execution {
    pub observation: Observation,
    /// CPU seconds spent: `min(recorded runtime, timeout)`.
    pub charged: f64,
}

/// What a run of `algorithm` on `instance` stopped at `timeout` would report.
pub fn simulate(scenario: &Scenario, instance: usize, algorithm: usize, timeout: f64) -> Execution {
    let rec = scenario.run(instance, algorithm);
    let observation = if rec.status == RunStatus::Ok && rec.runtime <= timeout {
        Observation::Solved(rec.runtime)
    } else {
        Observation::Censored(timeout)
    };
    Execution {
        observation,
        charged: rec.runtime.min(timeout),
    }
}

impl<'a> RunOracle<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        RunOracle {
            scenario,
            cache: LabelStore::new(scenario.n_instances(), scenario.n_algorithms()),
        }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn cache(&self) -> &LabelStore {
        &self.cache
    }

    /// Runs from scratch at `timeout` unless the cache already holds a
    /// result at least that informative, in which case nothing is charged.
    pub fn execute(&mut self, instance: usize, algorithm: usize, timeout: f64) -> Option<Execution> {
        if self.cache.get(instance, algorithm).settled_at(timeout) {
            return None;
        }
        let ex = simulate(self.scenario, instance, algorithm, timeout);
        self.cache.record(instance, algorithm, ex.observation);
        Some(ex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub step: usize,
    pub instance: usize,
    pub algorithm: usize,
    pub charged: f64,
    pub result: Observation,
}

/// Append-only record of every charged execution.
#[derive(Debug, Clone, Default)]
pub struct CostLedger {
    total: f64,
    entries: Vec<LedgerEntry>,
}

impl CostLedger {
    pub fn charge(&mut self, entry: LedgerEntry) {
        assert!(entry.charged >= 0.0, "negative charge {}", entry.charged);
        self.total += entry.charged;
        self.entries.push(entry);
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }
}
