//! Two-player games, their payoff functions and payoff gradients.
//!
//! Every game evaluates `payoff(v, w)` for the player holding `v` against an
//! opponent holding `w`. `payoff_train` is the differentiable surrogate used
//! during learning and `payoff_grad` is its analytic gradient in `v`.

mod blotto;
mod gmm;
mod monotone;

pub use blotto::{blotto_outcome, BlottoSpec};
pub use gmm::GmmRpsSpec;
pub use monotone::{Link, MonotoneGameSpec, RatingFunction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An agent's strategy: a finite real parameter vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PolicyParams(Vec<f64>);

impl PolicyParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::input(format!("parameter {i} is not finite ({})", values[i])));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for PolicyParams {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PolicyParams> for Vec<f64> {
    fn from(p: PolicyParams) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for PolicyParams {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Behaviour shared by all games.
pub trait TwoPlayerGame {
    /// Dimension of a strategy's parameter vector.
    fn dimension(&self) -> usize;

    /// Whether `payoff(v, w) = -payoff(w, v)` holds identically.
    fn is_zero_sum(&self) -> bool;

    /// Evaluation payoff of `v` against `w`.
    fn payoff(&self, v: &[f64], w: &[f64]) -> Result<f64>;

    /// Differentiable training surrogate of [`TwoPlayerGame::payoff`].
    fn payoff_train(&self, v: &[f64], w: &[f64]) -> Result<f64>;

    /// Gradient of `payoff_train(v, w)` with respect to `v`.
    fn payoff_grad(&self, v: &[f64], w: &[f64]) -> Result<Vec<f64>>;
}

/// A concrete game, as stored in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameSpec {
    GmmRps(GmmRpsSpec),
    Blotto(BlottoSpec),
    Monotone(MonotoneGameSpec),
}

impl GameSpec {
    pub fn name(&self) -> String {
        match self {
            GameSpec::GmmRps(g) => format!("gmm_rps{}", g.n_modes()),
            GameSpec::Blotto(b) => format!("blotto_k{}_a{}", b.tokens, b.areas),
            GameSpec::Monotone(_) => "monotone".to_string(),
        }
    }

    pub fn as_gmm(&self) -> Option<&GmmRpsSpec> {
        match self {
            GameSpec::GmmRps(g) => Some(g),
            _ => None,
        }
    }

    fn inner(&self) -> &dyn TwoPlayerGame {
        match self {
            GameSpec::GmmRps(g) => g,
            GameSpec::Blotto(b) => b,
            GameSpec::Monotone(m) => m,
        }
    }

    /// Validates the game's own parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            GameSpec::GmmRps(g) => g.validate(),
            GameSpec::Blotto(b) => b.validate(),
            GameSpec::Monotone(m) => m.validate(),
        }
    }
}

pub(crate) fn check_dims(game: &dyn TwoPlayerGame, v: &[f64], w: &[f64]) -> Result<()> {
    let d = game.dimension();
    if v.len() != d || w.len() != d {
        return Err(Error::input(format!("expected {d}-dimensional strategies, got {} and {}", v.len(), w.len())));
    }
    if v.iter().chain(w).any(|x| !x.is_finite()) {
        return Err(Error::input("strategy has non-finite entries"));
    }
    Ok(())
}

impl TwoPlayerGame for GameSpec {
    fn dimension(&self) -> usize {
        self.inner().dimension()
    }

    fn is_zero_sum(&self) -> bool {
        self.inner().is_zero_sum()
    }

    fn payoff(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        self.inner().payoff(v, w)
    }

    fn payoff_train(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        self.inner().payoff_train(v, w)
    }

    fn payoff_grad(&self, v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.inner().payoff_grad(v, w)
    }
}
