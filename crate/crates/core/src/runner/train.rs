//! The graph-scheduled training loop.

use std::collections::BTreeMap;
use std::path::Path;

use rand_distr::{Distribution, Normal};

use super::config::ExperimentConfig;
use super::evaluators::{resolve_evaluator_sets, run_log_path};
use super::log::{Event, JsonlWriter, Record, RecordBody, RecordSink, RunLog, Tee};
use crate::error::{Error, Result};
use crate::game::{GameSpec, PolicyParams, TwoPlayerGame};
use crate::graph::{initial_graph, update_adaptive, GraphBuild, InteractionGraph};
use crate::learner::{update, Agent, UpdateOutcome};
use crate::matrix::Matrix;
use crate::metagame::{
    build_payoff_matrix, build_self_play_matrix, diversity_from_solution, solve_nash, NashSolution, Sampling,
};
use crate::metrics::{convergence, coverage, MetricsRecord, TrajectoryLog};
use crate::par::{map_range, Execution};
use crate::rng::{Purpose, SeedStreams};

/// Matrix whose signs decide who beats whom: the payoff matrix itself for
/// zero-sum games, `A - Aᵀ` otherwise.
pub fn outcome_matrix(game: &GameSpec, payoff: &Matrix) -> Matrix {
    if game.is_zero_sum() {
        payoff.clone()
    } else {
        payoff.antisymmetric_part2()
    }
}

/// Nash of `a`, falling back to the solver's best attempt. The second value
/// carries the failure message, if any.
pub fn solve_or_best(a: &Matrix, tol: f64) -> Result<(NashSolution, Option<String>)> {
    match solve_nash(a, tol) {
        Ok(sol) => Ok((sol, None)),
        Err(Error::Solver { message, best }) => Ok((*best, Some(message))),
        Err(e) => Err(e),
    }
}

/// Effective diversity of a self-play payoff matrix. The general-sum form
/// reduces to the zero-sum one on antisymmetric matrices.
pub fn population_diversity(payoff: &Matrix, tol: f64) -> Result<f64> {
    let (sol, _) = solve_or_best(payoff, tol)?;
    Ok(diversity_from_solution(payoff, &sol))
}

/// Draws the initial population.
pub fn initial_agents(config: &ExperimentConfig, streams: &SeedStreams) -> Result<Vec<Agent>> {
    let dim = config.game.dimension();
    let noise = Normal::new(0.0, config.init_stddev()).map_err(|e| Error::config(e.to_string()))?;
    let stddev = config.learner().exploration_stddev;
    (0..config.population_size)
        .map(|id| {
            let mut rng = streams.stream(Purpose::Init, id as u64);
            let values = (0..dim).map(|_| noise.sample(&mut rng)).collect();
            Ok(Agent::new(id, PolicyParams::new(values)?, stddev))
        })
        .collect()
}

struct RunState<'a, S: RecordSink> {
    run_id: String,
    seed: u64,
    sink: &'a mut S,
}

impl<S: RecordSink> RunState<'_, S> {
    fn emit(&mut self, period: u64, body: RecordBody) -> Result<()> {
        self.sink.push(Record { run_id: self.run_id.clone(), seed: self.seed, period, body })
    }
}

fn params_of(agents: &[Agent]) -> Vec<PolicyParams> {
    agents.iter().map(|a| a.params.clone()).collect()
}

/// Runs one seed of `config`, streaming records into `sink`, and returns the
/// final agents. `evaluators` are the resolved evaluator sets.
pub fn run_seed<S: RecordSink>(
    config: &ExperimentConfig,
    seed: u64,
    evaluators: &[(String, Vec<PolicyParams>)],
    exec: Execution,
    sink: &mut S,
) -> Result<Vec<Agent>> {
    config.validate()?;
    let learner = config.learner();
    let game = &config.game;
    let streams = SeedStreams::new(seed);
    let n = config.population_size;
    let tol = config.nash_tol;
    let mut state = RunState { run_id: config.run_id(seed), seed, sink };

    state.emit(0, RecordBody::Config { config: Box::new(config.clone()) })?;

    let mut agents = initial_agents(config, &streams)?;
    let mut snapshot_id = 0u64;
    let GraphBuild { graph, fallback_rows } = initial_graph(config.graph, n)?;
    let mut graph: InteractionGraph = graph;
    state.emit(0, RecordBody::Graph { snapshot_id, kind: config.graph, weights: graph.weights().clone() })?;
    if !fallback_rows.is_empty() {
        state.emit(0, RecordBody::Event { event: Event::GraphFallback { snapshot_id, rows: fallback_rows } })?;
    }

    let mut trajectory = TrajectoryLog::new(n);
    let upp = config.updates_per_period as u64;

    for period in 0..config.total_periods as u64 {
        if config.graph.is_adaptive() && period > 0 {
            let sampling = Sampling::MonteCarlo {
                samples: config.mc_samples,
                exploration_stddev: learner.exploration_stddev,
                streams,
                key: period,
            };
            let payoff = build_self_play_matrix(&params_of(&agents), game, sampling, exec)?;
            let outcomes = outcome_matrix(game, &payoff.entries);
            match solve_nash(&outcomes, tol) {
                Ok(nash) => {
                    let built = update_adaptive(config.graph, &outcomes, Some(&nash.row))?;
                    if built.graph != graph {
                        snapshot_id += 1;
                        graph = built.graph;
                        state.emit(
                            period,
                            RecordBody::Graph { snapshot_id, kind: config.graph, weights: graph.weights().clone() },
                        )?;
                    }
                    if !built.fallback_rows.is_empty() {
                        state.emit(
                            period,
                            RecordBody::Event {
                                event: Event::GraphFallback { snapshot_id, rows: built.fallback_rows },
                            },
                        )?;
                    }
                }
                Err(Error::Solver { message, best }) => {
                    state.emit(
                        period,
                        RecordBody::Event {
                            event: Event::SolverFailure { message, exploitability: best.exploitability },
                        },
                    )?;
                }
                Err(e) => return Err(e),
            }
        }

        for step in period * upp..(period + 1) * upp {
            let (learner_id, opponent_id) = graph.sample_pair(&mut streams.stream(Purpose::Pair, step));
            let opponent =
                if opponent_id == learner_id { &agents[learner_id].snapshot } else { &agents[opponent_id].params };
            let mut rng = streams.stream2(Purpose::Update, learner_id as u64, step);
            match update(&agents[learner_id], opponent, game, &learner, &mut rng)? {
                UpdateOutcome::Applied(next) => agents[learner_id] = next,
                UpdateOutcome::Skipped { reason, .. } => {
                    state.emit(
                        period,
                        RecordBody::Event { event: Event::UpdateSkipped { learner: learner_id, step, reason } },
                    )?;
                }
            }
        }

        if (period + 1) % learner.snapshot_interval as u64 == 0 {
            agents.iter_mut().for_each(Agent::refresh_snapshot);
        }

        let params = params_of(&agents);
        trajectory.push(period, params.clone())?;
        state.emit(period, RecordBody::Trajectory { params: params.clone() })?;

        let metrics = period_metrics(config, &params, &trajectory, evaluators, period, snapshot_id, exec)?;
        state.emit(period, RecordBody::Metrics { metrics })?;
    }

    let params = params_of(&agents);
    let payoff = build_self_play_matrix(&params, game, Sampling::Deterministic, exec)?;
    let (nash, _) = solve_or_best(&payoff.entries, tol)?;
    let effective_diversity = diversity_from_solution(&payoff.entries, &nash);
    state.emit(
        config.total_periods as u64 - 1,
        RecordBody::Final { params, payoff: payoff.entries, nash: Some(nash), effective_diversity },
    )?;
    Ok(agents)
}

fn period_metrics(
    config: &ExperimentConfig,
    params: &[PolicyParams],
    trajectory: &TrajectoryLog,
    evaluators: &[(String, Vec<PolicyParams>)],
    period: u64,
    snapshot_id: u64,
    exec: Execution,
) -> Result<MetricsRecord> {
    let game = &config.game;
    let tol = config.nash_tol;
    let payoff = build_self_play_matrix(params, game, Sampling::Deterministic, exec)?;
    let effective_diversity = population_diversity(&payoff.entries, tol)?;

    let mut rpp_vs_evaluators = BTreeMap::new();
    for (name, evals) in evaluators {
        let a = build_payoff_matrix(params, evals, game, Sampling::Deterministic, exec)?;
        let (sol, _) = solve_or_best(&a.entries, tol)?;
        rpp_vs_evaluators.insert(name.clone(), sol.value);
    }

    let window = config.metric_window.min(trajectory.len());
    let convergence = if window >= 2 { convergence(trajectory, window, config.convergence_mode)? } else { 0.0 };
    let coverage = match game {
        GameSpec::GmmRps(spec) => Some(coverage(trajectory, spec, config.coverage_radius(), window.max(1))?),
        _ => None,
    };
    Ok(MetricsRecord {
        period,
        effective_diversity,
        rpp_vs_evaluators,
        convergence,
        coverage,
        graph_snapshot_ref: snapshot_id,
    })
}

/// Where run logs are written and evaluator runs are read from.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub exec: Execution,
    /// Write `<dir>/<run-id>.jsonl` plus a config echo when set.
    pub log_dir: Option<std::path::PathBuf>,
}

/// Runs every seed of `config`; seeds run as independent parallel jobs.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<Vec<RunLog>> {
    run_sweep(std::slice::from_ref(config), options)
}

/// Runs every `(config, seed)` pair of several configs as one parallel batch.
/// Output is in config order, then seed order.
pub fn run_sweep(configs: &[ExperimentConfig], options: &RunOptions) -> Result<Vec<RunLog>> {
    let mut jobs = Vec::new();
    for config in configs {
        config.validate()?;
        let dir = options.log_dir.clone().unwrap_or_else(|| config.output_dir.clone());
        let evaluators = resolve_evaluator_sets(config, &dir)?;
        if let Some(dir) = &options.log_dir {
            std::fs::create_dir_all(dir)?;
        }
        for &seed in &config.seeds {
            jobs.push((config, seed, evaluators.clone()));
        }
    }
    let results = map_range(options.exec, jobs.len(), |k| {
        let (config, seed, evaluators) = &jobs[k];
        let mut records: Vec<Record> = Vec::new();
        match &options.log_dir {
            Some(dir) => {
                let id = config.run_id(*seed);
                std::fs::write(dir.join(format!("{id}.config.toml")), config.to_toml_string()?)?;
                let mut file = JsonlWriter::create(&run_log_path(dir, &id))?;
                run_seed(config, *seed, evaluators, options.exec, &mut Tee(&mut records, &mut file))?;
            }
            None => {
                run_seed(config, *seed, evaluators, options.exec, &mut records)?;
            }
        }
        RunLog::from_records(records)
    });
    results.into_iter().collect()
}

/// Reads every `*.jsonl` run log in a directory, sorted by file name.
pub fn read_log_dir(dir: &Path) -> Result<Vec<RunLog>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    paths.iter().map(|p| RunLog::read_jsonl(p)).collect()
}
