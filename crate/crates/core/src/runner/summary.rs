//! Cross-run summaries: top-k selection per graph kind, mean ± stderr tables
//! and per-run scatter data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::log::RunLog;
use crate::error::{Error, Result};
use crate::graph::GraphKind;

/// Windowed means of one run's metric records.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub seed: u64,
    pub graph: GraphKind,
    pub effective_diversity: f64,
    pub rpp: BTreeMap<String, f64>,
    pub convergence: f64,
    pub coverage: Option<f64>,
}

impl RunSummary {
    /// Averages the last `window` metric records of `log`.
    pub fn from_log(log: &RunLog, window: usize) -> Result<Self> {
        let graph = log.graph_kind().ok_or_else(|| Error::Parse(format!("run {} has no config record", log.run_id)))?;
        let metrics: Vec<_> = log.metrics().collect();
        if metrics.is_empty() {
            return Err(Error::Parse(format!("run {} has no metric records", log.run_id)));
        }
        let tail = &metrics[metrics.len().saturating_sub(window.max(1))..];
        let n = tail.len() as f64;
        let mean = |f: &dyn Fn(&crate::metrics::MetricsRecord) -> f64| tail.iter().map(|m| f(m)).sum::<f64>() / n;

        let mut rpp = BTreeMap::new();
        for name in tail[0].rpp_vs_evaluators.keys() {
            let values: Option<Vec<f64>> = tail.iter().map(|m| m.rpp_vs_evaluators.get(name).copied()).collect();
            if let Some(v) = values {
                rpp.insert(name.clone(), v.iter().sum::<f64>() / n);
            }
        }
        let coverage =
            if tail.iter().all(|m| m.coverage.is_some()) { Some(mean(&|m| m.coverage.unwrap_or(0.0))) } else { None };
        Ok(Self {
            run_id: log.run_id.clone(),
            seed: log.seed,
            graph,
            effective_diversity: mean(&|m| m.effective_diversity),
            rpp,
            convergence: mean(&|m| m.convergence),
            coverage,
        })
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStderr {
    pub mean: f64,
    /// Zero for a single sample.
    pub stderr: f64,
    pub n: usize,
}

impl MeanStderr {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, stderr, n })
    }
}

/// One table row: the selected runs of a graph kind.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphSummary {
    pub graph: GraphKind,
    pub runs_available: usize,
    pub selected: Vec<String>,
    pub effective_diversity: MeanStderr,
    pub rpp: BTreeMap<String, MeanStderr>,
    pub convergence: MeanStderr,
    pub coverage: Option<MeanStderr>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub top_k: usize,
    pub window: usize,
    pub graphs: Vec<GraphSummary>,
    /// Every run, selected or not, in graph then run-id order.
    pub runs: Vec<RunSummary>,
}

/// Selects the `top_k` runs per graph kind by windowed effective diversity
/// (ties broken by run id) and aggregates their metrics.
pub fn summarize(logs: &[RunLog], top_k: usize, window: usize) -> Result<Summary> {
    if top_k == 0 {
        return Err(Error::input("top_k must be at least 1"));
    }
    if logs.is_empty() {
        return Err(Error::input("no run logs to summarize"));
    }
    let mut by_graph: BTreeMap<GraphKind, Vec<RunSummary>> = BTreeMap::new();
    for log in logs {
        let run = RunSummary::from_log(log, window)?;
        by_graph.entry(run.graph).or_default().push(run);
    }

    let mut graphs = Vec::new();
    let mut all_runs = Vec::new();
    for (graph, mut runs) in by_graph {
        runs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        let mut ranked: Vec<&RunSummary> = runs.iter().collect();
        ranked.sort_by(|a, b| {
            b.effective_diversity.total_cmp(&a.effective_diversity).then_with(|| a.run_id.cmp(&b.run_id))
        });
        if ranked.len() < top_k {
            log::warn!("{graph}: only {} runs available, fewer than top_k = {top_k}; using all", ranked.len());
        }
        ranked.truncate(top_k);
        graphs.push(aggregate(graph, runs.len(), &ranked));
        all_runs.extend(runs);
    }
    Ok(Summary { top_k, window, graphs, runs: all_runs })
}

fn aggregate(graph: GraphKind, available: usize, runs: &[&RunSummary]) -> GraphSummary {
    let collect = |f: &dyn Fn(&RunSummary) -> f64| runs.iter().map(|r| f(r)).collect::<Vec<_>>();
    let names: BTreeSet<&String> = runs.iter().flat_map(|r| r.rpp.keys()).collect();
    let rpp = names
        .into_iter()
        .filter_map(|name| {
            let values: Vec<f64> = runs.iter().filter_map(|r| r.rpp.get(name).copied()).collect();
            MeanStderr::of(&values).map(|m| (name.clone(), m))
        })
        .collect();
    let coverage_values: Vec<f64> = runs.iter().filter_map(|r| r.coverage).collect();
    let coverage = if coverage_values.len() == runs.len() { MeanStderr::of(&coverage_values) } else { None };
    GraphSummary {
        graph,
        runs_available: available,
        selected: runs.iter().map(|r| r.run_id.clone()).collect(),
        effective_diversity: MeanStderr::of(&collect(&|r| r.effective_diversity)).expect("nonempty"),
        rpp,
        convergence: MeanStderr::of(&collect(&|r| r.convergence)).expect("nonempty"),
        coverage,
    }
}

impl Summary {
    fn evaluator_names(&self) -> Vec<String> {
        let names: BTreeSet<&String> = self.runs.iter().flat_map(|r| r.rpp.keys()).collect();
        names.into_iter().cloned().collect()
    }

    /// Tab-separated table, one row per graph kind.
    pub fn table_tsv(&self) -> String {
        let names = self.evaluator_names();
        let mut out = String::from("graph\tn\tdiversity_mean\tdiversity_stderr");
        for name in &names {
            let _ = write!(out, "\trpp_{name}_mean\trpp_{name}_stderr");
        }
        out.push_str("\tconvergence_mean\tconvergence_stderr\tcoverage_mean\tcoverage_stderr\n");
        let cell = |m: Option<&MeanStderr>| match m {
            Some(m) => format!("\t{}\t{}", m.mean, m.stderr),
            None => "\tNA\tNA".to_string(),
        };
        for g in &self.graphs {
            let _ = write!(out, "{}\t{}", g.graph, g.effective_diversity.n);
            out.push_str(&cell(Some(&g.effective_diversity)));
            for name in &names {
                out.push_str(&cell(g.rpp.get(name)));
            }
            out.push_str(&cell(Some(&g.convergence)));
            out.push_str(&cell(g.coverage.as_ref()));
            out.push('\n');
        }
        out
    }

    /// Tab-separated per-run data: diversity vs RPP and convergence vs coverage.
    pub fn scatter_tsv(&self) -> String {
        let names = self.evaluator_names();
        let selected: BTreeSet<&String> = self.graphs.iter().flat_map(|g| g.selected.iter()).collect();
        let mut out = String::from("run_id\tgraph\tseed\tselected\tdiversity");
        for name in &names {
            let _ = write!(out, "\trpp_{name}");
        }
        out.push_str("\tconvergence\tcoverage\n");
        for r in &self.runs {
            let _ = write!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                r.run_id,
                r.graph,
                r.seed,
                selected.contains(&r.run_id) as u8,
                r.effective_diversity
            );
            for name in &names {
                match r.rpp.get(name) {
                    Some(v) => {
                        let _ = write!(out, "\t{v}");
                    }
                    None => out.push_str("\tNA"),
                }
            }
            match r.coverage {
                Some(c) => {
                    let _ = writeln!(out, "\t{}\t{c}", r.convergence);
                }
                None => {
                    let _ = writeln!(out, "\t{}\tNA", r.convergence);
                }
            }
        }
        out
    }
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. `None` when either
/// input is constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}
