//! ASLib scenario ingestion: the ARFF subset, the directory loader and
//! descriptive statistics.

pub mod arff;
mod scenario;

pub use arff::{parse_arff, ArffError, ArffErrorKind, ArffRelation, Attribute, AttributeKind, Value};
pub use scenario::{
    load_scenario, scenario_stats, write_scenario, RunRecord, RunStatus, Scenario, ScenarioError,
    ScenarioStats,
};
