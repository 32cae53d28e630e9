//! Per (instance, algorithm) observation state and the labels derived from it.

use thiserror::Error;

/// What is known about one algorithm on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Unlabelled,
    /// Stopped (or failed) without solving; only "not solved within `t`" is known.
    Censored(f64),
    Solved(f64),
}

impl Observation {
    /// Whether a run at `timeout` could not tell us anything new.
    pub fn settled_at(&self, timeout: f64) -> bool {
        match *self {
            Observation::Solved(_) => true,
            Observation::Censored(t) => t >= timeout,
            Observation::Unlabelled => false,
        }
    }

    /// Whether `next` is at least as informative as `self`.
    fn refined_by(&self, next: &Observation) -> bool {
        match (*self, *next) {
            (Observation::Solved(a), Observation::Solved(b)) => a == b,
            (Observation::Solved(_), _) => false,
            (Observation::Censored(a), Observation::Censored(b)) => b >= a,
            (_, Observation::Unlabelled) => matches!(self, Observation::Unlabelled),
            _ => true,
        }
    }
}

/// Which side of an algorithm pair is faster on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    FirstFaster,
    SecondFaster,
    NoLabel,
}

impl PairLabel {
    pub fn is_decisive(&self) -> bool {
        !matches!(self, PairLabel::NoLabel)
    }

    /// Class label for the pair's forest: class 1 means the second algorithm is faster.
    pub fn as_class(&self) -> Option<bool> {
        match self {
            PairLabel::FirstFaster => Some(false),
            PairLabel::SecondFaster => Some(true),
            PairLabel::NoLabel => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("pairwise label requested for an unlabelled run")]
pub struct UnlabelledRun;

/// Compares two observations of the same instance.
///
/// A solved run beats a censored one only when it finished strictly before
/// the other run was stopped; otherwise the order is unknown.
pub fn pairwise_label(a: Observation, b: Observation) -> Result<PairLabel, UnlabelledRun> {
    use Observation::*;
    Ok(match (a, b) {
        (Unlabelled, _) | (_, Unlabelled) => return Err(UnlabelledRun),
        (Solved(ra), Solved(rb)) if ra < rb => PairLabel::FirstFaster,
        (Solved(ra), Solved(rb)) if rb < ra => PairLabel::SecondFaster,
        (Solved(_), Solved(_)) => PairLabel::NoLabel,
        (Solved(r), Censored(t)) if r < t => PairLabel::FirstFaster,
        (Censored(t), Solved(r)) if r < t => PairLabel::SecondFaster,
        _ => PairLabel::NoLabel,
    })
}

/// Timeout-predictor target at level `timeout`: `Some(true)` when the run
/// is known not to finish within `timeout`, `Some(false)` when it does, and
/// `None` when the observation cannot tell.
pub fn timeout_label(obs: Observation, timeout: f64) -> Option<bool> {
    match obs {
        Observation::Solved(r) => Some(r > timeout),
        Observation::Censored(t) if t >= timeout => Some(true),
        _ => None,
    }
}

/// Observation state for every (instance, algorithm) of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelStore {
    n_algorithms: usize,
    state: Vec<Observation>,
}

impl LabelStore {
    pub fn new(n_instances: usize, n_algorithms: usize) -> Self {
        LabelStore {
            n_algorithms,
            state: vec![Observation::Unlabelled; n_instances * n_algorithms],
        }
    }

    pub fn n_algorithms(&self) -> usize {
        self.n_algorithms
    }

    pub fn get(&self, instance: usize, algorithm: usize) -> Observation {
        self.state[instance * self.n_algorithms + algorithm]
    }

    /// Records a new observation. Knowledge only grows: a solved run is
    /// final and a censoring level never decreases.
    pub fn record(&mut self, instance: usize, algorithm: usize, obs: Observation) {
        let slot = &mut self.state[instance * self.n_algorithms + algorithm];
        assert!(
            slot.refined_by(&obs),
            "observation {obs:?} would lose information over {slot:?}"
        );
        *slot = obs;
    }

    pub fn pair_label(&self, instance: usize, a: usize, b: usize) -> Result<PairLabel, UnlabelledRun> {
        pairwise_label(self.get(instance, a), self.get(instance, b))
    }

    pub fn is_observed(&self, instance: usize) -> bool {
        (0..self.n_algorithms).any(|a| self.get(instance, a) != Observation::Unlabelled)
    }
}
