//! Zero-sum matrix-game Nash equilibria by linear programming.
//!
//! The row player maximizes `pᵀ·A·q` and the column player minimizes it. After
//! shifting `A` to strictly positive entries `B`, the column player's problem
//! is `max Σy  s.t.  B·y ≤ 1, y ≥ 0`, which starts feasible at the slack basis.
//! The row player's strategy is read off the dual prices of the final tableau.
//! Pivoting uses Bland's rule, so the result is a deterministic function of
//! the matrix.

use serde::{Deserialize, Serialize};

use super::MixedStrategy;
use crate::error::{Error, Result};
use crate::graph::SUPPORT_EPS;
use crate::matrix::Matrix;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_PIVOTS: usize = 1_000_000;

const PIVOT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashSolution {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
    /// `rowᵀ·A·col`.
    pub value: f64,
    /// Gain available to best pure deviations of both players.
    pub exploitability: f64,
}

/// `max_i (A·q)_i - min_j (pᵀ·A)_j`: the row player's best-response gain plus
/// the column player's, measured against the same pair.
pub fn exploitability(a: &Matrix, p: &[f64], q: &[f64]) -> f64 {
    let best_row = a.mul_vec(q).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let best_col = a.vec_mul(p).into_iter().fold(f64::INFINITY, f64::min);
    best_row - best_col
}

/// Solves the matrix game with the default pivot budget.
pub fn solve_nash(a: &Matrix, tol: f64) -> Result<NashSolution> {
    solve_nash_with_budget(a, tol, DEFAULT_MAX_PIVOTS)
}

pub fn solve_nash_with_budget(a: &Matrix, tol: f64, max_pivots: usize) -> Result<NashSolution> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::input("payoff matrix is empty"));
    }
    if !a.is_finite() {
        return Err(Error::input("payoff matrix has non-finite entries"));
    }
    let scale = a.max_abs().max(1.0);
    let symmetric = a.is_antisymmetric(1e-12 * scale);

    let lp = solve_lp(a, max_pivots);
    let (mut p, mut q, converged) = match lp {
        LpOutcome::Optimal { p, q } => (p, q, true),
        LpOutcome::Budget { p, q } => (p, q, false),
    };
    if symmetric {
        q = p.clone();
    }
    normalize(&mut p);
    normalize(&mut q);

    let value = a.bilinear(&p, &q);
    let exploit = exploitability(a, &p, &q).max(0.0);
    let solution = NashSolution {
        row: MixedStrategy::from_normalized(p, SUPPORT_EPS),
        col: MixedStrategy::from_normalized(q, SUPPORT_EPS),
        value,
        exploitability: exploit,
    };
    if !converged {
        return Err(Error::Solver {
            message: format!("pivot budget of {max_pivots} exhausted"),
            best: Box::new(solution),
        });
    }
    if exploit > tol {
        return Err(Error::Solver {
            message: format!("exploitability above tolerance {tol:.1e}"),
            best: Box::new(solution),
        });
    }
    Ok(solution)
}

fn normalize(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = x.iter().sum();
    if sum > 0.0 {
        for v in x.iter_mut() {
            *v /= sum;
        }
    } else {
        let u = 1.0 / x.len() as f64;
        x.iter_mut().for_each(|v| *v = u);
    }
}

enum LpOutcome {
    Optimal { p: Vec<f64>, q: Vec<f64> },
    Budget { p: Vec<f64>, q: Vec<f64> },
}

/// Dense tableau simplex on `max 1ᵀy  s.t.  B·y ≤ 1, y ≥ 0`.
fn solve_lp(a: &Matrix, max_pivots: usize) -> LpOutcome {
    let (m, n) = (a.rows(), a.cols());
    let min = a.as_slice().iter().cloned().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;

    // columns: y_0..y_{n-1}, slack_0..slack_{m-1}, rhs
    let width = n + m + 1;
    let rhs = n + m;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..n {
            t[i * width + j] = a[(i, j)] + shift;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + rhs] = 1.0;
    }
    let obj = m * width;
    for j in 0..n {
        t[obj + j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut pivots = 0;
    let converged = loop {
        // Bland: lowest-index improving column
        let Some(enter) = (0..n + m).find(|&j| t[obj + j] < -PIVOT_EPS) else {
            break true;
        };
        if pivots >= max_pivots {
            break false;
        }
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = t[i * width + enter];
            if coef > PIVOT_EPS {
                let ratio = t[i * width + rhs] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - PIVOT_EPS || (ratio <= best + PIVOT_EPS && basis[i] < basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        // B > 0 keeps the problem bounded, so a leaving row always exists
        let Some((row, _)) = leave else {
            break true;
        };
        pivot(&mut t, width, m + 1, row, enter);
        basis[row] = enter;
        pivots += 1;
    };

    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i * width + rhs];
        }
    }
    let x: Vec<f64> = (0..m).map(|i| t[obj + n + i]).collect();
    if converged {
        LpOutcome::Optimal { p: x, q: y }
    } else {
        LpOutcome::Budget { p: x, q: y }
    }
}

fn pivot(t: &mut [f64], width: usize, rows: usize, row: usize, col: usize) {
    let pv = t[row * width + col];
    for k in 0..width {
        t[row * width + k] /= pv;
    }
    t[row * width + col] = 1.0;
    for r in 0..rows {
        if r == row {
            continue;
        }
        let factor = t[r * width + col];
        if factor == 0.0 {
            continue;
        }
        for k in 0..width {
            t[r * width + k] -= factor * t[row * width + k];
        }
        t[r * width + col] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Best pure responses computed straight from nested rows.
    fn pure_response_gap(rows: &[Vec<f64>], p: &[f64], q: &[f64]) -> f64 {
        let mut best_row = f64::NEG_INFINITY;
        for row in rows {
            let v: f64 = row.iter().zip(q).map(|(a, b)| a * b).sum();
            best_row = best_row.max(v);
        }
        let mut best_col = f64::INFINITY;
        for j in 0..rows[0].len() {
            let v: f64 = rows.iter().zip(p).map(|(row, pi)| row[j] * pi).sum();
            best_col = best_col.min(v);
        }
        best_row - best_col
    }

    fn rps() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]).unwrap()
    }

    #[test]
    fn rock_paper_scissors_is_uniform() {
        let sol = solve_nash(&rps(), DEFAULT_TOL).unwrap();
        for x in sol.row.probabilities().iter().chain(sol.col.probabilities()) {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(sol.value.abs() < 1e-12);
        assert!(sol.exploitability <= 1e-12);
    }

    #[test]
    fn dominant_row_is_pure() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [0.5, 1.5, 2.0], [0.0, 1.0, 2.5]]).unwrap();
        let sol = solve_nash(&a, DEFAULT_TOL).unwrap();
        assert_eq!(sol.row.probabilities(), &[1.0, 0.0, 0.0]);
        assert_eq!(sol.col.probabilities(), &[1.0, 0.0, 0.0]);
        assert!((sol.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_asymmetric_game_value() {
        // the classic 3x3 example with value 1/12
        let a = Matrix::from_rows(&[[0.0, 2.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]).unwrap();
        let sol = solve_nash(&a, DEFAULT_TOL).unwrap();
        assert!((sol.value - 1.0 / 12.0).abs() < 1e-12);
        let p = sol.row.probabilities();
        let q = sol.col.probabilities();
        for (got, want) in p.iter().zip([0.25, 1.0 / 3.0, 5.0 / 12.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in q.iter().zip([1.0 / 3.0, 0.25, 5.0 / 12.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rectangular_and_single_entry() {
        let a = Matrix::from_rows(&[[2.5]]).unwrap();
        let sol = solve_nash(&a, DEFAULT_TOL).unwrap();
        assert_eq!(sol.value, 2.5);
        let a = Matrix::from_rows(&[[3.0, -1.0, 0.0], [-2.0, 4.0, 1.0]]).unwrap();
        let sol = solve_nash(&a, DEFAULT_TOL).unwrap();
        assert!(pure_response_gap(&a.to_rows(), sol.row.probabilities(), sol.col.probabilities()) <= 1e-10);
    }

    #[test]
    fn bad_input_rejected() {
        assert!(matches!(solve_nash(&Matrix::zeros(0, 0), DEFAULT_TOL), Err(Error::Input(_))));
        let a = Matrix::from_rows(&[[f64::NAN]]).unwrap();
        assert!(matches!(solve_nash(&a, DEFAULT_TOL), Err(Error::Input(_))));
    }

    #[test]
    fn exhausted_budget_reports_best_solution() {
        let a = Matrix::from_rows(&[[0.0, 2.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]).unwrap();
        match solve_nash_with_budget(&a, DEFAULT_TOL, 1) {
            Err(Error::Solver { best, .. }) => {
                assert_eq!(best.row.len(), 3);
                assert!(best.exploitability > 0.0);
            }
            other => panic!("expected solver error, got {other:?}"),
        }
    }

    fn antisymmetric(n: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Less => v[i * n + j],
                std::cmp::Ordering::Greater => -v[j * n + i],
                std::cmp::Ordering::Equal => 0.0,
            })
        })
    }

    proptest! {
        #[test]
        fn antisymmetric_games_get_symmetric_certified_solutions(a in (2usize..9).prop_flat_map(antisymmetric)) {
            let sol = solve_nash(&a, DEFAULT_TOL).unwrap();
            prop_assert_eq!(sol.row.probabilities(), sol.col.probabilities());
            prop_assert!(sol.value.abs() <= 1e-12);
            let gap = pure_response_gap(&a.to_rows(), sol.row.probabilities(), sol.col.probabilities());
            prop_assert!(gap <= DEFAULT_TOL);
        }

        #[test]
        fn general_games_are_certified(
            (m, n, v) in (1usize..8, 1usize..8).prop_flat_map(|(m, n)| (Just(m), Just(n), prop::collection::vec(-3.0f64..3.0, m * n)))
        ) {
            let a = Matrix::from_fn(m, n, |i, j| v[i * n + j]);
            let sol = solve_nash(&a, DEFAULT_TOL).unwrap();
            let gap = pure_response_gap(&a.to_rows(), sol.row.probabilities(), sol.col.probabilities());
            prop_assert!(gap <= DEFAULT_TOL);
            prop_assert!((sol.value - a.bilinear(sol.row.probabilities(), sol.col.probabilities())).abs() < 1e-9);
        }
    }
}
