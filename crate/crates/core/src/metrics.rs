//! Trajectory metrics: how converged each agent is, and how many game modes
//! the population covers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, GmmRpsSpec, PolicyParams};

/// Mean policy of every agent, one entry per logged period.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    periods: Vec<u64>,
    /// `series[agent][t]`
    series: Vec<Vec<PolicyParams>>,
}

impl TrajectoryLog {
    pub fn new(n_agents: usize) -> Self {
        Self { periods: Vec::new(), series: vec![Vec::new(); n_agents] }
    }

    pub fn push(&mut self, period: u64, params: Vec<PolicyParams>) -> Result<()> {
        if params.len() != self.series.len() {
            return Err(Error::input(format!(
                "trajectory has {} agents, got {} points",
                self.series.len(),
                params.len()
            )));
        }
        if self.periods.last().is_some_and(|&p| p >= period) {
            return Err(Error::input(format!("period {period} is not after the last logged period")));
        }
        self.periods.push(period);
        for (s, p) in self.series.iter_mut().zip(params) {
            s.push(p);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn n_agents(&self) -> usize {
        self.series.len()
    }

    pub fn periods(&self) -> &[u64] {
        &self.periods
    }

    pub fn agent(&self, i: usize) -> &[PolicyParams] {
        &self.series[i]
    }

    fn window(&self, agent: usize, window: usize) -> &[PolicyParams] {
        let s = &self.series[agent];
        &s[s.len() - window..]
    }

    /// Mean policy of each agent over the last `window` entries.
    pub fn windowed_means(&self, window: usize) -> Result<Vec<Vec<f64>>> {
        if window == 0 || window > self.len() {
            return Err(Error::input(format!("window {window} outside 1..={}", self.len())));
        }
        Ok((0..self.n_agents()).map(|i| centroid(self.window(i, window))).collect())
    }
}

// Accumulates offsets from the first point so identical points give an
// exact centroid.
fn centroid(points: &[PolicyParams]) -> Vec<f64> {
    let origin = points[0].as_slice();
    let mut c = vec![0.0; origin.len()];
    for p in points {
        for ((ci, x), o) in c.iter_mut().zip(p.as_slice()).zip(origin) {
            *ci += x - o;
        }
    }
    c.iter_mut().zip(origin).for_each(|(x, o)| *x = o + *x / points.len() as f64);
    c
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    /// RMS distance of the windowed points from their centroid.
    #[default]
    Centroid,
    /// RMS length of consecutive steps within the window.
    Successive,
}

/// Negative RMSD of each agent's last `window` mean policies, averaged over
/// agents. 0 means every agent sat still.
pub fn convergence(traj: &TrajectoryLog, window: usize, mode: ConvergenceMode) -> Result<f64> {
    if window < 2 || window > traj.len() {
        return Err(Error::input(format!("convergence window must be in 2..={}, got {window}", traj.len())));
    }
    if traj.n_agents() == 0 {
        return Err(Error::input("trajectory has no agents"));
    }
    let total: f64 = (0..traj.n_agents())
        .map(|i| {
            let pts = traj.window(i, window);
            let msd = match mode {
                ConvergenceMode::Centroid => {
                    let c = centroid(pts);
                    pts.iter().map(|p| dist2(p.as_slice(), &c)).sum::<f64>() / pts.len() as f64
                }
                ConvergenceMode::Successive => {
                    pts.windows(2).map(|w| dist2(w[0].as_slice(), w[1].as_slice())).sum::<f64>()
                        / (pts.len() - 1) as f64
                }
            };
            msd.sqrt()
        })
        .sum();
    // adding 0.0 turns a -0.0 into 0.0
    Ok(0.0 - total / traj.n_agents() as f64)
}

/// Fraction of modes with some agent's windowed mean policy within `radius`
/// of the mode center.
pub fn coverage(traj: &TrajectoryLog, spec: &GmmRpsSpec, radius: f64, window: usize) -> Result<f64> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::input(format!("coverage radius must be positive, got {radius}")));
    }
    let means = traj.windowed_means(window)?;
    let r2 = radius * radius;
    let covered = spec.mode_centers().iter().filter(|c| means.iter().any(|m| dist2(m, &c[..]) <= r2)).count();
    Ok(covered as f64 / spec.n_modes() as f64)
}

/// [`coverage`] for any game; only GMM-RPS has enumerable modes.
pub fn coverage_for_game(traj: &TrajectoryLog, game: &GameSpec, radius: f64, window: usize) -> Result<f64> {
    match game {
        GameSpec::GmmRps(spec) => coverage(traj, spec, radius, window),
        other => Err(Error::Unsupported(format!("coverage is only defined for GMM-RPS, not {}", other.name()))),
    }
}

/// One row of per-period metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub period: u64,
    pub effective_diversity: f64,
    pub rpp_vs_evaluators: BTreeMap<String, f64>,
    pub convergence: f64,
    /// `None` for games without enumerable modes.
    pub coverage: Option<f64>,
    pub graph_snapshot_ref: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> PolicyParams {
        PolicyParams::new(vec![x, y]).unwrap()
    }

    fn log_from(series: &[Vec<[f64; 2]>]) -> TrajectoryLog {
        let mut log = TrajectoryLog::new(series.len());
        for t in 0..series[0].len() {
            log.push(t as u64, series.iter().map(|s| p(s[t][0], s[t][1])).collect()).unwrap();
        }
        log
    }

    #[test]
    fn constant_trajectory_has_zero_convergence() {
        let log = log_from(&[vec![[0.3, 0.1]; 10], vec![[-1.0, 2.0]; 10]]);
        assert_eq!(convergence(&log, 10, ConvergenceMode::Centroid).unwrap(), 0.0);
        assert_eq!(convergence(&log, 4, ConvergenceMode::Successive).unwrap(), 0.0);
    }

    #[test]
    fn two_point_alternation() {
        let d = 0.8;
        let pts: Vec<[f64; 2]> = (0..10).map(|t| if t % 2 == 0 { [0.0, 0.0] } else { [d, 0.0] }).collect();
        let log = log_from(&[pts]);
        // every point sits d/2 from the centroid
        assert!((convergence(&log, 6, ConvergenceMode::Centroid).unwrap() + d / 2.0).abs() < 1e-12);
        assert!((convergence(&log, 6, ConvergenceMode::Successive).unwrap() + d).abs() < 1e-12);
    }

    #[test]
    fn window_bounds() {
        let log = log_from(&[vec![[0.0, 0.0]; 3]]);
        assert!(convergence(&log, 1, ConvergenceMode::Centroid).is_err());
        assert!(convergence(&log, 4, ConvergenceMode::Centroid).is_err());
        assert!(coverage(&log, &GmmRpsSpec::new(3).unwrap(), 0.5, 4).is_err());
    }

    #[test]
    fn push_rejects_bad_periods_and_shapes() {
        let mut log = TrajectoryLog::new(1);
        log.push(3, vec![p(0.0, 0.0)]).unwrap();
        assert!(log.push(3, vec![p(0.0, 0.0)]).is_err());
        assert!(log.push(4, vec![]).is_err());
    }

    #[test]
    fn coverage_examples() {
        let spec = GmmRpsSpec::new(3).unwrap();
        let c = spec.mode_centers().to_vec();
        let all = log_from(&[vec![c[0]; 3], vec![c[1]; 3], vec![c[2]; 3]]);
        assert_eq!(coverage(&all, &spec, 0.5, 3).unwrap(), 1.0);
        let one = log_from(&[vec![c[0]; 3], vec![c[0]; 3], vec![c[0]; 3]]);
        assert!((coverage(&one, &spec, 0.5, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        // the circle center is exactly one radius (1.0) from every mode
        let radius = 1.0 / 1.001;
        let center = log_from(&[vec![[0.0, 0.0]; 3]]);
        for m in &c {
            assert!(dist2(&[0.0, 0.0], m).sqrt() > radius);
        }
        assert_eq!(coverage(&center, &spec, radius, 3).unwrap(), 0.0);
        assert_eq!(coverage(&center, &spec, 1.0 + 1e-9, 3).unwrap(), 1.0);
    }

    #[test]
    fn coverage_unsupported_for_blotto() {
        let log = log_from(&[vec![[0.0, 0.0]; 3]]);
        let game = GameSpec::Blotto(crate::game::BlottoSpec::default());
        assert!(matches!(coverage_for_game(&log, &game, 0.5, 3), Err(Error::Unsupported(_))));
    }

    fn trajectories() -> impl Strategy<Value = Vec<Vec<[f64; 2]>>> {
        (1usize..4, 3usize..8).prop_flat_map(|(agents, len)| {
            prop::collection::vec(prop::collection::vec(prop::array::uniform2(-2.0f64..2.0), len), agents)
        })
    }

    proptest! {
        #[test]
        fn convergence_nonpositive_and_homogeneous(series in trajectories(), c in 0.0f64..5.0) {
            let log = log_from(&series);
            let w = log.len();
            let base = convergence(&log, w, ConvergenceMode::Centroid).unwrap();
            prop_assert!(base <= 0.0);
            let scaled: Vec<Vec<[f64; 2]>> = series.iter()
                .map(|s| s.iter().map(|q| [q[0] * c, q[1] * c]).collect()).collect();
            let s = convergence(&log_from(&scaled), w, ConvergenceMode::Centroid).unwrap();
            prop_assert!((s - c * base).abs() < 1e-9);
        }

        #[test]
        fn coverage_monotone_in_radius(series in trajectories(), r in 0.05f64..2.0, extra in 0.0f64..1.0) {
            let spec = GmmRpsSpec::new(3).unwrap();
            let log = log_from(&series);
            let a = coverage(&log, &spec, r, 2).unwrap();
            let b = coverage(&log, &spec, r + extra, 2).unwrap();
            prop_assert!(a <= b);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn metrics_invariant_under_agent_relabeling(series in trajectories()) {
            let spec = GmmRpsSpec::new(3).unwrap();
            let mut rev = series.clone();
            rev.reverse();
            let (a, b) = (log_from(&series), log_from(&rev));
            let w = a.len();
            prop_assert!((convergence(&a, w, ConvergenceMode::Centroid).unwrap()
                - convergence(&b, w, ConvergenceMode::Centroid).unwrap()).abs() < 1e-12);
            prop_assert_eq!(coverage(&a, &spec, 0.5, w).unwrap(), coverage(&b, &spec, 0.5, w).unwrap());
        }
    }
}
