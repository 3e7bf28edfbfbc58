//! Monotone games: `payoff(v, w) = σ(f(v) - f(w))` for a rating `f` and an
//! increasing link `σ`. Training against any opponent pushes `v` the same way.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_dims, TwoPlayerGame};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RatingFunction {
    /// `f(v) = Σ weights_i · v_i`.
    Linear { weights: Vec<f64> },
    /// Negated Rastrigin: `f(v) = -Σ (v_i² - A·cos(2π v_i))`. Smooth, many local maxima.
    Rastrigin { amplitude: f64 },
}

impl RatingFunction {
    pub fn value(&self, v: &[f64]) -> f64 {
        match self {
            RatingFunction::Linear { weights } => weights.iter().zip(v).map(|(a, b)| a * b).sum(),
            RatingFunction::Rastrigin { amplitude } => {
                -v.iter().map(|x| x * x - amplitude * (2.0 * PI * x).cos()).sum::<f64>()
            }
        }
    }

    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        match self {
            RatingFunction::Linear { weights } => weights.clone(),
            RatingFunction::Rastrigin { amplitude } => {
                v.iter().map(|x| -(2.0 * x + 2.0 * PI * amplitude * (2.0 * PI * x).sin())).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Identity,
    Sigmoid,
    Tanh,
}

impl Link {
    pub fn value(self, x: f64) -> f64 {
        match self {
            Link::Identity => x,
            Link::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Link::Tanh => x.tanh(),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Link::Identity => 1.0,
            Link::Sigmoid => {
                let s = self.value(x);
                s * (1.0 - s)
            }
            Link::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }

    /// Odd links make the game exactly zero-sum.
    pub fn is_odd(self) -> bool {
        matches!(self, Link::Identity | Link::Tanh)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneGameSpec {
    pub dimension: usize,
    pub rating: RatingFunction,
    pub link: Link,
}

impl MonotoneGameSpec {
    pub fn new(dimension: usize, rating: RatingFunction, link: Link) -> Self {
        Self { dimension, rating, link }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::config("monotone game needs dimension >= 1"));
        }
        match &self.rating {
            RatingFunction::Linear { weights } if weights.len() != self.dimension => Err(Error::config(format!(
                "linear rating has {} weights for dimension {}",
                weights.len(),
                self.dimension
            ))),
            RatingFunction::Rastrigin { amplitude } if !amplitude.is_finite() => {
                Err(Error::config("rastrigin amplitude must be finite"))
            }
            _ => Ok(()),
        }
    }
}

impl TwoPlayerGame for MonotoneGameSpec {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn is_zero_sum(&self) -> bool {
        self.link.is_odd()
    }

    fn payoff(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        check_dims(self, v, w)?;
        Ok(self.link.value(self.rating.value(v) - self.rating.value(w)))
    }

    fn payoff_train(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        self.payoff(v, w)
    }

    fn payoff_grad(&self, v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        check_dims(self, v, w)?;
        let scale = self.link.derivative(self.rating.value(v) - self.rating.value(w));
        Ok(self.rating.gradient(v).into_iter().map(|g| scale * g).collect())
    }
}
