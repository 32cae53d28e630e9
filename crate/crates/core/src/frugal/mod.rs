//! Cost-aware active learning of the pairwise selector.
//!
//! Each pairwise model keeps its own pool of candidate training instances.
//! A step picks `N` (pair, instance) requests, by least confidence or at
//! random, runs both algorithms through the [`RunOracle`] under the current
//! time limit, charges the CPU time to the [`CostLedger`], and refits the
//! ensemble. With dynamic timeouts the limit starts low and grows whenever
//! validation PAR10 stalls.

mod controller;
mod engine;
mod oracle;
pub mod uncertainty;

pub use controller::{ControllerConfig, DynamicTimeoutController};
pub use engine::{
    advance, batch_size_for, execute_request, init_loop, run_forest, run_loop, select_queries_random,
    select_queries_uncertainty, LoopConfig, LoopError, LoopState, QueryPool, QueryRequest, SelectionStrategy,
    StepRecord,
};
pub use oracle::{simulate, CostLedger, Execution, LedgerEntry, RunOracle};
