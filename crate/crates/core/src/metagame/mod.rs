//! Empirical game theory over populations: evaluation matrices, Nash,
//! relative population performance and effective diversity.

mod nash;

pub use nash::{exploitability, solve_nash, solve_nash_with_budget, NashSolution, DEFAULT_MAX_PIVOTS, DEFAULT_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, PolicyParams, TwoPlayerGame};
use crate::learner::sample_action;
use crate::matrix::Matrix;
use crate::par::{map_range, Execution};
use crate::rng::{Purpose, SeedStreams};

/// A probability vector over population members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    probabilities: Vec<f64>,
    support_eps: f64,
}

impl MixedStrategy {
    pub fn new(probabilities: Vec<f64>, support_eps: f64) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::input("mixed strategy is empty"));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::input("mixed strategy has negative or non-finite entries"));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("mixed strategy sums to {sum}, not 1")));
        }
        Ok(Self { probabilities, support_eps })
    }

    pub(crate) fn from_normalized(probabilities: Vec<f64>, support_eps: f64) -> Self {
        Self { probabilities, support_eps }
    }

    pub fn uniform(n: usize) -> Self {
        Self { probabilities: vec![1.0 / n as f64; n], support_eps: crate::graph::SUPPORT_EPS }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Indices with probability above the support threshold.
    pub fn support(&self) -> Vec<usize> {
        self.probabilities.iter().enumerate().filter(|(_, p)| **p > self.support_eps).map(|(i, _)| i).collect()
    }
}

/// Evaluation matrix between a row population and a column population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub entries: Matrix,
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    /// Stochastic rollouts averaged per entry; 0 for deterministic strategies.
    pub mc_samples: u32,
}

impl PayoffMatrix {
    pub fn from_entries(entries: Matrix) -> Self {
        Self {
            row_labels: (0..entries.rows()).collect(),
            col_labels: (0..entries.cols()).collect(),
            entries,
            mc_samples: 0,
        }
    }
}

/// How matrix entries are evaluated.
#[derive(Clone, Copy, Debug)]
pub enum Sampling {
    /// Payoff between the mean strategies.
    Deterministic,
    /// Mean payoff over `samples` draws of both players' exploration policies.
    MonteCarlo { samples: u32, exploration_stddev: f64, streams: SeedStreams, key: u64 },
}

impl Sampling {
    fn samples(&self) -> u32 {
        match self {
            Sampling::Deterministic => 0,
            Sampling::MonteCarlo { samples, .. } => *samples,
        }
    }
}

/// `A[i][j] = payoff(rows[i], cols[j])`.
pub fn build_payoff_matrix(
    rows: &[PolicyParams],
    cols: &[PolicyParams],
    game: &GameSpec,
    sampling: Sampling,
    exec: Execution,
) -> Result<PayoffMatrix> {
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::input("both populations must be nonempty"));
    }
    let (m, n) = (rows.len(), cols.len());
    let entries = map_range(exec, m * n, |k| {
        let (i, j) = (k / n, k % n);
        evaluate_pair(&rows[i], &cols[j], game, sampling, k as u64).map(|(ij, _)| ij)
    });
    let entries: Vec<f64> = entries.into_iter().collect::<Result<_>>()?;
    Ok(PayoffMatrix {
        entries: Matrix::from_fn(m, n, |i, j| entries[i * n + j]),
        row_labels: (0..m).collect(),
        col_labels: (0..n).collect(),
        mc_samples: sampling.samples(),
    })
}

/// Self-play matrix of one population. Under Monte-Carlo sampling both
/// orientations of a pair share the same draws, so a zero-sum game yields an
/// exactly antisymmetric matrix.
pub fn build_self_play_matrix(
    population: &[PolicyParams],
    game: &GameSpec,
    sampling: Sampling,
    exec: Execution,
) -> Result<PayoffMatrix> {
    if population.is_empty() {
        return Err(Error::input("population must be nonempty"));
    }
    let n = population.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values = map_range(exec, pairs.len(), |k| {
        let (i, j) = pairs[k];
        evaluate_pair(&population[i], &population[j], game, sampling, (i * n + j) as u64)
    });
    let mut entries = Matrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(values) {
        let (ij, ji) = v?;
        if i == j {
            entries[(i, i)] = 0.5 * (ij + ji);
        } else {
            entries[(i, j)] = ij;
            entries[(j, i)] = ji;
        }
    }
    Ok(PayoffMatrix {
        entries,
        row_labels: (0..n).collect(),
        col_labels: (0..n).collect(),
        mc_samples: sampling.samples(),
    })
}

/// Returns `(payoff(v, w), payoff(w, v))` under the given sampling.
fn evaluate_pair(
    v: &PolicyParams,
    w: &PolicyParams,
    game: &GameSpec,
    sampling: Sampling,
    index: u64,
) -> Result<(f64, f64)> {
    match sampling {
        Sampling::Deterministic => {
            Ok((game.payoff(v.as_slice(), w.as_slice())?, game.payoff(w.as_slice(), v.as_slice())?))
        }
        Sampling::MonteCarlo { samples: 0, .. } => evaluate_pair(v, w, game, Sampling::Deterministic, index),
        Sampling::MonteCarlo { samples, exploration_stddev, streams, key } => {
            let mut rng = streams.stream2(Purpose::Evaluation, key, index);
            let (mut ij, mut ji) = (0.0, 0.0);
            for _ in 0..samples {
                let a = sample_action(v, exploration_stddev, &mut rng);
                let b = sample_action(w, exploration_stddev, &mut rng);
                ij += game.payoff(a.as_slice(), b.as_slice())?;
                ji += game.payoff(b.as_slice(), a.as_slice())?;
            }
            let s = samples as f64;
            Ok((ij / s, ji / s))
        }
    }
}

/// `u(P, P') = pᵀ·A·q` at the Nash of `A`.
pub fn relative_population_performance(a: &Matrix, tol: f64) -> Result<f64> {
    Ok(solve_nash(a, tol)?.value)
}

/// `pᵀ·relu(A)·p` at the symmetric Nash of an antisymmetric self-play matrix.
pub fn effective_diversity(a: &Matrix, tol: f64) -> Result<f64> {
    if !a.is_antisymmetric(1e-9 * a.max_abs().max(1.0)) {
        return Err(Error::Usage(
            "effective_diversity needs an antisymmetric matrix; use effective_diversity_general".into(),
        ));
    }
    let sol = solve_nash(a, tol)?;
    let p = sol.row.probabilities();
    Ok(a.map(|x| x.max(0.0)).bilinear(p, p))
}

/// `pᵀ·relu(A - u)·q` where `(p, q)` is the Nash of `A` and `u` its value.
pub fn effective_diversity_general(a: &Matrix, tol: f64) -> Result<f64> {
    let sol = solve_nash(a, tol)?;
    Ok(diversity_from_solution(a, &sol))
}

pub(crate) fn diversity_from_solution(a: &Matrix, sol: &NashSolution) -> f64 {
    let u = sol.value;
    a.map(|x| (x - u).max(0.0)).bilinear(sol.row.probabilities(), sol.col.probabilities())
}

/// Worst case of the mixture `v` over the evaluator columns of `a`.
pub fn performance_vs_evaluators(v: &MixedStrategy, a: &Matrix) -> Result<f64> {
    if a.cols() == 0 {
        return Err(Error::input("evaluator set is empty"));
    }
    if v.len() != a.rows() {
        return Err(Error::input(format!("mixture has {} entries for {} rows", v.len(), a.rows())));
    }
    Ok(a.vec_mul(v.probabilities()).into_iter().fold(f64::INFINITY, f64::min))
}
