//! Interaction graphs: who trains against whom.
//!
//! `weights[i][j]` is how strongly learner `i` trains against opponent `j`.
//! The diagonal means "play against my own frozen snapshot".

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metagame::MixedStrategy;

/// Payoffs within this distance of zero count as ties.
pub const TIE_EPS: f64 = 1e-6;
/// Nash probabilities above this are in the support.
pub const SUPPORT_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    AllToAll,
    SelfPlay,
    Cycle,
    HierarchicalCycle,
    Psro,
    PlayBetter,
    PlayWorse,
    PlayWorseAndSelf,
    RectifiedNash,
}

impl GraphKind {
    pub const ALL: [GraphKind; 9] = [
        GraphKind::AllToAll,
        GraphKind::SelfPlay,
        GraphKind::Cycle,
        GraphKind::HierarchicalCycle,
        GraphKind::Psro,
        GraphKind::PlayBetter,
        GraphKind::PlayWorse,
        GraphKind::PlayWorseAndSelf,
        GraphKind::RectifiedNash,
    ];

    pub fn is_adaptive(self) -> bool {
        matches!(
            self,
            GraphKind::PlayBetter | GraphKind::PlayWorse | GraphKind::PlayWorseAndSelf | GraphKind::RectifiedNash
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::AllToAll => "all_to_all",
            GraphKind::SelfPlay => "self_play",
            GraphKind::Cycle => "cycle",
            GraphKind::HierarchicalCycle => "hierarchical_cycle",
            GraphKind::Psro => "psro",
            GraphKind::PlayBetter => "play_better",
            GraphKind::PlayWorse => "play_worse",
            GraphKind::PlayWorseAndSelf => "play_worse_and_self",
            GraphKind::RectifiedNash => "rectified_nash",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GraphKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown graph kind '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    weights: Matrix,
}

/// A graph plus the rows that had no edges and were given self-play.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphBuild {
    pub graph: InteractionGraph,
    pub fallback_rows: Vec<usize>,
}

impl InteractionGraph {
    /// Wraps a weight matrix, checking it is square, finite, nonnegative and
    /// has a positive entry in every row.
    pub fn from_weights(weights: Matrix) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(Error::input("interaction graph must be a nonempty square matrix"));
        }
        if weights.as_slice().iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::input("graph weights must be finite and nonnegative"));
        }
        if let Some(i) = (0..weights.rows()).find(|&i| !weights.row(i).iter().any(|&w| w > 0.0)) {
            return Err(Error::input(format!("graph row {i} has no positive weight")));
        }
        Ok(Self { weights })
    }

    /// Replaces empty rows by self-play and records which ones.
    fn with_fallback(mut weights: Matrix) -> GraphBuild {
        let mut fallback_rows = Vec::new();
        for i in 0..weights.rows() {
            if !weights.row(i).iter().any(|&w| w > 0.0) {
                weights[(i, i)] = 1.0;
                fallback_rows.push(i);
            }
        }
        GraphBuild { graph: InteractionGraph { weights }, fallback_rows }
    }

    pub fn size(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn opponents(&self, learner: usize) -> impl Iterator<Item = usize> + '_ {
        self.weights.row(learner).iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(j, _)| j)
    }

    /// Learner uniformly at random, opponent proportional to the learner's row.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let learner = rng.random_range(0..self.size());
        (learner, self.sample_opponent(learner, rng))
    }

    pub fn sample_opponent<R: Rng + ?Sized>(&self, learner: usize, rng: &mut R) -> usize {
        let row = self.weights.row(learner);
        let total: f64 = row.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut last = learner;
        for (j, &w) in row.iter().enumerate() {
            if w > 0.0 {
                if u < w {
                    return j;
                }
                u -= w;
                last = j;
            }
        }
        last
    }
}

/// Builds one of the five fixed graphs over `n` agents.
pub fn build_fixed(kind: GraphKind, n: usize) -> Result<GraphBuild> {
    if kind.is_adaptive() {
        return Err(Error::Usage(format!("{kind} is adaptive; use update_adaptive")));
    }
    if n < 2 {
        return Err(Error::config(format!("population size must be >= 2, got {n}")));
    }
    let weights = match kind {
        GraphKind::AllToAll => Matrix::filled(n, n, 1.0),
        GraphKind::SelfPlay => Matrix::identity(n),
        GraphKind::Cycle => Matrix::from_fn(n, n, |i, j| f64::from(j == (i + 1) % n)),
        GraphKind::HierarchicalCycle => {
            let m = n - 1;
            Matrix::from_fn(n, n, |i, j| if i == m { f64::from(j < m) } else { f64::from(j == (i + 1) % m) })
        }
        GraphKind::Psro => Matrix::from_fn(n, n, |i, j| f64::from(j < i)),
        _ => unreachable!(),
    };
    Ok(InteractionGraph::with_fallback(weights))
}

/// Recomputes an adaptive graph from the population's current outcome matrix.
///
/// `outcomes[i][j] > 0` means agent `i` beats agent `j`. `nash` is only read
/// for [`GraphKind::RectifiedNash`].
pub fn update_adaptive(kind: GraphKind, outcomes: &Matrix, nash: Option<&MixedStrategy>) -> Result<GraphBuild> {
    if !kind.is_adaptive() {
        return Err(Error::Usage(format!("{kind} is a fixed graph; use build_fixed")));
    }
    if !outcomes.is_square() || outcomes.rows() == 0 {
        return Err(Error::input("outcome matrix must be a nonempty square matrix"));
    }
    if !outcomes.is_finite() {
        return Err(Error::input("outcome matrix has non-finite entries"));
    }
    let n = outcomes.rows();
    let weights = match kind {
        GraphKind::PlayBetter => Matrix::from_fn(n, n, |i, j| f64::from(outcomes[(i, j)] < -TIE_EPS)),
        GraphKind::PlayWorse => Matrix::from_fn(n, n, |i, j| f64::from(outcomes[(i, j)] > TIE_EPS)),
        GraphKind::PlayWorseAndSelf => Matrix::from_fn(n, n, |i, j| f64::from(i == j || outcomes[(i, j)] > TIE_EPS)),
        GraphKind::RectifiedNash => {
            let nash = nash.ok_or_else(|| Error::Usage("rectified_nash needs a Nash distribution".into()))?;
            if nash.len() != n {
                return Err(Error::input(format!("nash has {} entries for {n} agents", nash.len())));
            }
            let p = nash.probabilities();
            Matrix::from_fn(n, n, |i, j| {
                if p[i] > SUPPORT_EPS {
                    f64::from(outcomes[(i, j)] >= -TIE_EPS)
                } else {
                    f64::from(i == j)
                }
            })
        }
        _ => unreachable!(),
    };
    Ok(InteractionGraph::with_fallback(weights))
}

/// The graph used before any outcome matrix exists: adaptive graphs start fully connected.
pub fn initial_graph(kind: GraphKind, n: usize) -> Result<GraphBuild> {
    if kind.is_adaptive() {
        build_fixed(GraphKind::AllToAll, n)
    } else {
        build_fixed(kind, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, SeedStreams};

    fn rows(g: &InteractionGraph) -> Vec<Vec<u8>> {
        g.weights().to_rows().iter().map(|r| r.iter().map(|&x| x as u8).collect()).collect()
    }

    fn rps() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]).unwrap()
    }

    #[test]
    fn fixed_graph_shapes() {
        let cycle = build_fixed(GraphKind::Cycle, 4).unwrap();
        assert_eq!(rows(&cycle.graph), vec![vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 0]]);
        assert!(cycle.fallback_rows.is_empty());

        let sp = build_fixed(GraphKind::SelfPlay, 3).unwrap();
        assert_eq!(sp.graph.weights(), &Matrix::identity(3));

        let psro = build_fixed(GraphKind::Psro, 4).unwrap();
        assert_eq!(rows(&psro.graph), vec![vec![1, 0, 0, 0], vec![1, 0, 0, 0], vec![1, 1, 0, 0], vec![1, 1, 1, 0]]);
        assert_eq!(psro.fallback_rows, vec![0]);

        let hc = build_fixed(GraphKind::HierarchicalCycle, 4).unwrap();
        assert_eq!(rows(&hc.graph), vec![vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![1, 0, 0, 0], vec![1, 1, 1, 0]]);

        let all = build_fixed(GraphKind::AllToAll, 3).unwrap();
        assert_eq!(all.graph.weights(), &Matrix::filled(3, 3, 1.0));
    }

    #[test]
    fn fixed_builder_rejects_adaptive_and_tiny() {
        assert!(matches!(build_fixed(GraphKind::PlayBetter, 4), Err(Error::Usage(_))));
        assert!(build_fixed(GraphKind::Cycle, 1).is_err());
        assert!(matches!(update_adaptive(GraphKind::Cycle, &rps(), None), Err(Error::Usage(_))));
    }

    #[test]
    fn fixed_graphs_are_idempotent() {
        for kind in GraphKind::ALL.into_iter().filter(|k| !k.is_adaptive()) {
            for n in 2..7 {
                assert_eq!(build_fixed(kind, n).unwrap(), build_fixed(kind, n).unwrap());
            }
        }
    }

    #[test]
    fn adaptive_sign_patterns_on_rps() {
        let better = update_adaptive(GraphKind::PlayBetter, &rps(), None).unwrap();
        assert_eq!(rows(&better.graph), vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]]);
        let worse = update_adaptive(GraphKind::PlayWorse, &rps(), None).unwrap();
        assert_eq!(rows(&worse.graph), vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        let worse_self = update_adaptive(GraphKind::PlayWorseAndSelf, &rps(), None).unwrap();
        assert_eq!(rows(&worse_self.graph), vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
    }

    #[test]
    fn rectified_nash_beat_or_tie_rule() {
        let a = rps();
        let uniform = MixedStrategy::uniform(3);
        let g = update_adaptive(GraphKind::RectifiedNash, &a, Some(&uniform)).unwrap();
        // brute force: w[i][j] = 1 iff a[i][j] >= -eps for supported rows
        for i in 0..3 {
            for j in 0..3 {
                let expected = f64::from(a[(i, j)] >= -TIE_EPS);
                assert_eq!(g.graph.weights()[(i, j)], expected);
            }
            assert_eq!(g.graph.weights()[(i, i)], 1.0);
        }
        let pure = MixedStrategy::new(vec![1.0, 0.0, 0.0], SUPPORT_EPS).unwrap();
        let g = update_adaptive(GraphKind::RectifiedNash, &a, Some(&pure)).unwrap();
        assert_eq!(rows(&g.graph), vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(update_adaptive(GraphKind::RectifiedNash, &a, None).is_err());
    }

    #[test]
    fn undefeated_agent_falls_back_to_self_play() {
        // agent 0 beats everyone
        let a = Matrix::from_rows(&[[0.0, 1.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, -1.0, 0.0]]).unwrap();
        let g = update_adaptive(GraphKind::PlayBetter, &a, None).unwrap();
        assert_eq!(g.fallback_rows, vec![0]);
        assert_eq!(rows(&g.graph)[0], vec![1, 0, 0]);
        let g = update_adaptive(GraphKind::PlayWorse, &a, None).unwrap();
        assert_eq!(g.fallback_rows, vec![2]);
    }

    #[test]
    fn adaptive_rejects_bad_input() {
        let bad = Matrix::from_rows(&[[0.0, f64::NAN], [0.0, 0.0]]).unwrap();
        assert!(matches!(update_adaptive(GraphKind::PlayWorse, &bad, None), Err(Error::Input(_))));
        let rect = Matrix::zeros(2, 3);
        assert!(update_adaptive(GraphKind::PlayWorse, &rect, None).is_err());
    }

    #[test]
    fn sampling_respects_support() {
        let s = SeedStreams::new(2);
        let sp = build_fixed(GraphKind::SelfPlay, 5).unwrap().graph;
        let cycle = build_fixed(GraphKind::Cycle, 4).unwrap().graph;
        for t in 0..1000 {
            let (l, o) = sp.sample_pair(&mut s.stream(Purpose::Pair, t));
            assert_eq!(l, o);
            assert_eq!(cycle.sample_opponent(2, &mut s.stream(Purpose::Pair, t)), 3);
        }
    }

    #[test]
    fn graph_kind_parses() {
        for k in GraphKind::ALL {
            assert_eq!(k.as_str().parse::<GraphKind>().unwrap(), k);
        }
        assert!("ring".parse::<GraphKind>().is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(InteractionGraph::from_weights(Matrix::zeros(2, 2)).is_err());
        assert!(InteractionGraph::from_weights(Matrix::filled(2, 2, -1.0)).is_err());
        assert!(InteractionGraph::from_weights(Matrix::identity(2)).is_ok());
    }
}
