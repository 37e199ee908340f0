//! Experiment runner for layer-wise L1 sparse networks: run configs,
//! training, evaluation against reference solutions, grid search over the
//! penalty weights and dense/sparse comparisons.

pub mod compare;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod gridsearch;
pub mod runner;
pub mod targets;

pub use compare::{compare, Comparison};
pub use config::{Counts, RunConfig, OUTPUT_ROOT_VAR};
pub use error::{Error, Result};
pub use evaluation::{evaluate, evaluate_net, test_set, Evaluation, Labeled, TestSpec};
pub use gridsearch::{grid_search, SearchResult, SearchSpec, TraceRow};
pub use runner::{prepare, run, train, HistoryRow, Prepared, RunReport, SparsitySummary, Trained};
pub use targets::Target;
