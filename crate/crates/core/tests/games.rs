use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::Rng;

use popgraph::game::{GmmRpsSpec, Link, MonotoneGameSpec, RatingFunction};
use popgraph::learner::score_function_sample;
use popgraph::rng::{Purpose, SeedStreams};
use popgraph::{Agent, GameSpec, PolicyParams, TwoPlayerGame};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient of E_{a ~ N(m, s^2 I)} payoff(a, w) for GMM-RPS. Convolving each
/// mode pdf with the exploration noise widens it to variance sigma^2 + s^2.
fn smoothed_gmm_gradient(spec: &GmmRpsSpec, m: &[f64], w: &[f64], s: f64) -> Vec<f64> {
    let var = spec.mode_stddev().powi(2) + s * s;
    let gw = spec.gmm_weights(w).unwrap();
    let mg: Vec<f64> =
        (0..spec.n_modes()).map(|i| (0..spec.n_modes()).map(|j| spec.game_matrix()[(i, j)] * gw[j]).sum()).collect();
    let mut grad = vec![0.0; 2];
    for (i, c) in spec.mode_centers().iter().enumerate() {
        let d2 = (c[0] - m[0]).powi(2) + (c[1] - m[1]).powi(2);
        let pdf = (-d2 / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var);
        for k in 0..2 {
            grad[k] += mg[i] * pdf * (c[k] - m[k]) / var;
        }
    }
    grad
}

#[test]
fn score_function_matches_smoothed_gradient() {
    let spec = GmmRpsSpec::new(3).unwrap();
    let game = GameSpec::GmmRps(spec.clone());
    let s = 0.5;
    let mut agent = Agent::new(0, PolicyParams::new(vec![0.3, 0.2]).unwrap(), s);
    agent.baseline = 0.05;
    let opponent = PolicyParams::new(spec.mode_centers()[1].to_vec()).unwrap();
    let mut rng = SeedStreams::new(11).stream(Purpose::Update, 0);
    let n = 200_000;
    let (mut sum, mut sum_sq) = ([0.0; 2], [0.0; 2]);
    for _ in 0..n {
        let sample = score_function_sample(&agent, &opponent, 0.0, &game, &mut rng).unwrap();
        for k in 0..2 {
            sum[k] += sample.gradient[k];
            sum_sq[k] += sample.gradient[k].powi(2);
        }
    }
    let want = smoothed_gmm_gradient(&spec, agent.params.as_slice(), opponent.as_slice(), s);
    let mut cosine_num = 0.0;
    for k in 0..2 {
        let mean = sum[k] / n as f64;
        let se = ((sum_sq[k] / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - want[k]).abs() <= 3.0 * se, "coordinate {k}: {mean} vs {} (se {se})", want[k]);
        cosine_num += mean * want[k];
    }
    let got = [sum[0] / n as f64, sum[1] / n as f64];
    assert!(cosine_num / (dot(&got, &got).sqrt() * dot(&want, &want).sqrt()) >= 0.9);
}

#[test]
fn smoothed_oracle_reduces_to_exact_gradient() {
    let spec = GmmRpsSpec::new(3).unwrap();
    let game = GameSpec::GmmRps(spec.clone());
    let (m, w) = ([0.4, -0.1], [-0.5, 0.3]);
    let exact = game.payoff_grad(&m, &w).unwrap();
    let smoothed = smoothed_gmm_gradient(&spec, &m, &w, 0.0);
    for k in 0..2 {
        assert_relative_eq!(exact[k], smoothed[k], max_relative = 1e-12);
    }
}

fn rastrigin_sigmoid() -> GameSpec {
    GameSpec::Monotone(MonotoneGameSpec::new(3, RatingFunction::Rastrigin { amplitude: 1.0 }, Link::Sigmoid))
}

proptest! {
    #[test]
    fn monotone_gradients_never_conflict(
        v in prop::collection::vec(-3.0f64..3.0, 3),
        w1 in prop::collection::vec(-3.0f64..3.0, 3),
        w2 in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let game = rastrigin_sigmoid();
        let g1 = game.payoff_grad(&v, &w1).unwrap();
        let g2 = game.payoff_grad(&v, &w2).unwrap();
        prop_assert!(dot(&g1, &g2) >= -1e-12);
    }

    #[test]
    fn gmm_payoff_is_bounded(v in prop::collection::vec(-3.0f64..3.0, 2), w in prop::collection::vec(-3.0f64..3.0, 2)) {
        let spec = GmmRpsSpec::new(3).unwrap();
        let peak = spec.peak_density();
        let p = GameSpec::GmmRps(spec).payoff(&v, &w).unwrap();
        prop_assert!(p.abs() <= 3.0 * peak * peak);
    }
}

#[test]
fn gmm_rps_has_conflicting_gradients() {
    let game = GameSpec::GmmRps(GmmRpsSpec::new(3).unwrap());
    let mut rng = SeedStreams::new(5).stream(Purpose::Metrics, 0);
    let found = (0..1000).any(|_| {
        let mut p = || [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let (v, a, b) = (p(), p(), p());
        dot(&game.payoff_grad(&v, &a).unwrap(), &game.payoff_grad(&v, &b).unwrap()) < 0.0
    });
    assert!(found);
}
