//! Experiment orchestration: configs, training runs, logs and summaries.

mod config;
mod evaluators;
mod log;
mod summary;
mod train;

pub use config::{EvaluatorRule, EvaluatorSet, ExperimentConfig};
pub use evaluators::{evaluate_population, make_evaluators, resolve_evaluator_sets, run_log_path};
pub use log::{Event, JsonlWriter, Record, RecordBody, RecordSink, RunLog, Tee};
pub use summary::{spearman, summarize, GraphSummary, MeanStderr, RunSummary, Summary};
pub use train::{
    initial_agents, outcome_matrix, population_diversity, read_log_dir, run_experiment, run_seed, run_sweep,
    solve_or_best, RunOptions,
};
