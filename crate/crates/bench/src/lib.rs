//! Shared fixtures for the benchmarks.

use frugal_core::aslib::Scenario;
use frugal_core::preprocess::{make_splits, SplitPlan};
use frugal_core::synthetic::SyntheticSpec;

/// Deterministic two-class data: the label is the sign of a noisy linear score.
pub fn labelled_rows(n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| next()).collect()).collect();
    let labels = rows
        .iter()
        .map(|r| r.iter().enumerate().map(|(j, x)| x / (j + 1) as f64).sum::<f64>() + 0.1 * next() > 0.75)
        .collect();
    (rows, labels)
}

/// The synthetic frugality scenario and its split.
pub fn scenario(seed: u64) -> (Scenario, SplitPlan) {
    let s = SyntheticSpec::frugality(seed).generate();
    let plan = make_splits(&s, seed).expect("synthetic scenario splits");
    (s, plan)
}
