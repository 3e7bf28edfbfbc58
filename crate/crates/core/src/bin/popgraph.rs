use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use popgraph::graph::GraphKind;
use popgraph::metagame::solve_nash;
use popgraph::runner::{
    evaluate_population, make_evaluators, read_log_dir, run_log_path, run_sweep, summarize, EvaluatorRule,
    ExperimentConfig, RunLog, RunOptions,
};
use popgraph::{Execution, Matrix};

#[derive(Parser)]
#[command(name = "popgraph", version, about = "Population training with interaction-graph matchmaking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of one or more experiment configs and write run logs.
    Run {
        /// TOML experiment configs.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Override the graph kind: `all` or a comma-separated list.
        #[arg(long)]
        graphs: Option<String>,
        /// Override the seeds: `a..b` or a comma-separated list.
        #[arg(long)]
        seeds: Option<String>,
        /// Output root for run logs.
        #[arg(long, env = "POPGRAPH_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Run everything on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Summarize the run logs in a directory as a tab-separated table.
    Summarize {
        log_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        /// Metric records averaged per run.
        #[arg(long, default_value_t = 50)]
        window: usize,
        /// Also write per-run scatter data to this file.
        #[arg(long)]
        scatter: Option<PathBuf>,
    },
    /// Solve a zero-sum matrix game given as plain text.
    Nash {
        matrix_file: PathBuf,
        #[arg(long, default_value_t = popgraph::metagame::DEFAULT_TOL)]
        tol: f64,
    },
    /// Evaluate a finished run's final population against an evaluator set.
    Eval {
        run_id: String,
        /// `ground_truth_modes` or `from_run:<run-id>`.
        #[arg(long)]
        against: String,
        /// Directory holding the run logs.
        #[arg(long, env = "POPGRAPH_OUTPUT_DIR", default_value = "runs")]
        dir: PathBuf,
    },
}

fn parse_seeds(text: &str) -> anyhow::Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a >= b {
            bail!("empty seed range {text}");
        }
        return Ok((a..b).collect());
    }
    text.split(',').map(|s| s.trim().parse::<u64>().map_err(Into::into)).collect()
}

fn parse_graphs(text: &str) -> anyhow::Result<Vec<GraphKind>> {
    if text == "all" {
        return Ok(GraphKind::ALL.to_vec());
    }
    text.split(',').map(|s| s.trim().parse::<GraphKind>().map_err(Into::into)).collect()
}

fn configure_threads(threads: usize) -> anyhow::Result<()> {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    #[cfg(not(feature = "parallel"))]
    if threads > 1 {
        log::warn!("built without the parallel feature; ignoring --threads {threads}");
    }
    Ok(())
}

fn run(
    paths: &[PathBuf],
    graphs: Option<&str>,
    seeds: Option<&str>,
    output_dir: Option<PathBuf>,
    exec: Execution,
) -> anyhow::Result<()> {
    let mut configs = Vec::new();
    for path in paths {
        let mut base = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
        if let Some(dir) = &output_dir {
            base.output_dir = dir.clone();
        }
        if let Some(seeds) = seeds {
            base.seeds = parse_seeds(seeds)?;
        }
        let kinds = match graphs {
            Some(g) => parse_graphs(g)?,
            None => vec![base.graph],
        };
        for kind in kinds {
            configs.push(ExperimentConfig { graph: kind, ..base.clone() });
        }
    }
    let out = configs[0].output_dir.clone();
    if configs.iter().any(|c| c.output_dir != out) {
        bail!("all configs in one invocation must share an output directory");
    }
    log::info!("running {} configs into {}", configs.len(), out.display());
    let logs = run_sweep(&configs, &RunOptions { exec, log_dir: Some(out.clone()) })?;
    for log in &logs {
        if let Some(m) = log.metrics().last() {
            println!(
                "{}\tdiversity={:.6}\tconvergence={:.6}\tcoverage={}",
                log.run_id,
                m.effective_diversity,
                m.convergence,
                m.coverage.map_or("NA".to_string(), |c| format!("{c:.3}"))
            );
        }
    }
    Ok(())
}

fn nash(path: &Path, tol: f64) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let a: Matrix = text.parse()?;
    let sol = solve_nash(&a, tol)?;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(" ");
    println!("row\t{}", fmt(sol.row.probabilities()));
    println!("col\t{}", fmt(sol.col.probabilities()));
    println!("value\t{:.10}", sol.value);
    println!("exploitability\t{:.3e}", sol.exploitability);
    Ok(())
}

fn eval(run_id: &str, against: &str, dir: &Path) -> anyhow::Result<()> {
    let log = RunLog::read_jsonl(&run_log_path(dir, run_id))?;
    let config = log.config().context("run log has no config record")?;
    let population = log.final_params().context("run log has no parameters")?;
    let rule = EvaluatorRule::parse(against)?;
    let evaluators = make_evaluators(&rule, &config.game, dir)?;
    let rpp = evaluate_population(&population, &evaluators, &config.game, config.nash_tol, Execution::default())?;
    println!("{run_id}\t{against}\t{rpp:.10}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { configs, graphs, seeds, output_dir, threads, sequential } => configure_threads(threads)
            .and_then(|_| {
                let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
                run(&configs, graphs.as_deref(), seeds.as_deref(), output_dir, exec)
            }),
        Command::Summarize { log_dir, top_k, window, scatter } => (|| {
            let logs = read_log_dir(&log_dir)?;
            let summary = summarize(&logs, top_k, window)?;
            print!("{}", summary.table_tsv());
            if let Some(path) = scatter {
                std::fs::write(&path, summary.scatter_tsv())?;
            }
            Ok(())
        })(),
        Command::Nash { matrix_file, tol } => nash(&matrix_file, tol),
        Command::Eval { run_id, against, dir } => eval(&run_id, &against, &dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
