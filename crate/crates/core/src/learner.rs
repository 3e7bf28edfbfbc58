//! Agents and their one-step policy-gradient update.
//!
//! Each agent holds the mean of an isotropic Gaussian policy over strategies.
//! Games here are stateless, so an actor-critic collapses to REINFORCE with a
//! scalar running baseline.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, PolicyParams, TwoPlayerGame};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: usize,
    pub params: PolicyParams,
    pub exploration_stddev: f64,
    /// Running average of observed rewards.
    pub baseline: f64,
    /// Frozen past copy used when the agent plays itself.
    pub snapshot: PolicyParams,
}

impl Agent {
    pub fn new(id: usize, params: PolicyParams, exploration_stddev: f64) -> Self {
        Self { id, snapshot: params.clone(), params, exploration_stddev, baseline: 0.0 }
    }

    pub fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> PolicyParams {
        sample_action(&self.params, self.exploration_stddev, rng)
    }

    pub fn refresh_snapshot(&mut self) {
        self.snapshot = self.params.clone();
    }
}

/// `params + N(0, stddev²)` per coordinate.
pub fn sample_action<R: Rng + ?Sized>(params: &PolicyParams, stddev: f64, rng: &mut R) -> PolicyParams {
    let values = params
        .as_slice()
        .iter()
        .map(|&p| {
            let z: f64 = rng.sample(StandardNormal);
            if stddev > 0.0 {
                p + stddev * z
            } else {
                p
            }
        })
        .collect();
    // finite params plus finite noise stay finite
    PolicyParams::new(values).expect("sampled action is finite")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Follow the analytic payoff gradient against the opponent's mean strategy.
    ExactGradient,
    /// REINFORCE: sample actions for both players and use the likelihood-ratio gradient.
    ScoreFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub learning_rate: f64,
    pub estimator: Estimator,
    pub baseline_decay: f64,
    pub exploration_stddev: f64,
    /// Graph-update periods between snapshot refreshes.
    pub snapshot_interval: u32,
}

impl LearnerConfig {
    /// Tuned defaults per game family.
    pub fn default_for(game: &GameSpec) -> Self {
        // GMM-RPS modes sit sqrt(3) apart with width 0.5; narrower exploration
        // lets self-play settle on one mode instead of cycling.
        let (learning_rate, exploration_stddev) = match game {
            GameSpec::GmmRps(_) => (0.05, 0.5),
            GameSpec::Blotto(_) => (0.02, 0.1),
            GameSpec::Monotone(_) => (0.05, 0.1),
        };
        Self {
            learning_rate,
            estimator: Estimator::ScoreFunction,
            baseline_decay: 0.9,
            exploration_stddev,
            snapshot_interval: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!("learning_rate must be >= 0, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return Err(Error::config(format!("baseline_decay must be in [0, 1), got {}", self.baseline_decay)));
        }
        if !(self.exploration_stddev > 0.0 && self.exploration_stddev.is_finite()) {
            return Err(Error::config(format!("exploration_stddev must be positive, got {}", self.exploration_stddev)));
        }
        if self.snapshot_interval == 0 {
            return Err(Error::config("snapshot_interval must be >= 1"));
        }
        Ok(())
    }
}

/// One likelihood-ratio sample: the score `∇ log N(a; params, s²)` scaled by
/// `reward - baseline`, together with the raw reward.
#[derive(Clone, Debug)]
pub struct ScoreSample {
    pub gradient: Vec<f64>,
    pub reward: f64,
}

/// Draws one action for the learner and one for the opponent and returns the
/// REINFORCE gradient sample. The opponent explores with `opponent_stddev`.
pub fn score_function_sample<R: Rng + ?Sized>(
    agent: &Agent,
    opponent: &PolicyParams,
    opponent_stddev: f64,
    game: &GameSpec,
    rng: &mut R,
) -> Result<ScoreSample> {
    let s = agent.exploration_stddev;
    let action = agent.sample_action(rng);
    let opponent_action = sample_action(opponent, opponent_stddev, rng);
    let reward = game.payoff_train(action.as_slice(), opponent_action.as_slice())?;
    let advantage = reward - agent.baseline;
    let gradient =
        action.as_slice().iter().zip(agent.params.as_slice()).map(|(a, m)| advantage * (a - m) / (s * s)).collect();
    Ok(ScoreSample { gradient, reward })
}

#[derive(Clone, Debug, PartialEq)]
pub enum UpdateOutcome {
    Applied(Agent),
    /// The step produced a non-finite gradient; the agent is returned unchanged.
    Skipped {
        agent: Agent,
        reason: String,
    },
}

impl UpdateOutcome {
    pub fn agent(&self) -> &Agent {
        match self {
            UpdateOutcome::Applied(a) | UpdateOutcome::Skipped { agent: a, .. } => a,
        }
    }

    pub fn into_agent(self) -> Agent {
        match self {
            UpdateOutcome::Applied(a) | UpdateOutcome::Skipped { agent: a, .. } => a,
        }
    }
}

/// One learning step of `agent` against a fixed opponent. The opponent is only
/// read; it explores with the configured stddev under the score-function
/// estimator.
pub fn update<R: Rng + ?Sized>(
    agent: &Agent,
    opponent: &PolicyParams,
    game: &GameSpec,
    config: &LearnerConfig,
    rng: &mut R,
) -> Result<UpdateOutcome> {
    let (gradient, reward) = match config.estimator {
        Estimator::ExactGradient => (game.payoff_grad(agent.params.as_slice(), opponent.as_slice())?, None),
        Estimator::ScoreFunction => {
            let sample = score_function_sample(agent, opponent, config.exploration_stddev, game, rng)?;
            (sample.gradient, Some(sample.reward))
        }
    };
    if gradient.iter().any(|g| !g.is_finite()) {
        return Ok(UpdateOutcome::Skipped { agent: agent.clone(), reason: "non-finite gradient".into() });
    }
    let values: Vec<f64> =
        agent.params.as_slice().iter().zip(&gradient).map(|(p, g)| p + config.learning_rate * g).collect();
    let Ok(params) = PolicyParams::new(values) else {
        return Ok(UpdateOutcome::Skipped {
            agent: agent.clone(),
            reason: "update produced non-finite parameters".into(),
        });
    };
    let mut next = agent.clone();
    next.params = params;
    if let Some(r) = reward {
        next.baseline = config.baseline_decay * agent.baseline + (1.0 - config.baseline_decay) * r;
    }
    Ok(UpdateOutcome::Applied(next))
}
