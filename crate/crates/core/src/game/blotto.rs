//! Colonel Blotto with `k` tokens over `a` areas.
//!
//! A strategy is a vector of `a` logits; the allocation is `softmax(logits)·k`,
//! rounded to integers by largest remainder for evaluation.

use serde::{Deserialize, Serialize};

use super::{check_dims, TwoPlayerGame};
use crate::error::{Error, Result};

const LOGIT_CLAMP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlottoSpec {
    pub tokens: u32,
    pub areas: usize,
    /// Width of the tanh surrogate used for training. `None` makes the game
    /// evaluation-only.
    #[serde(default = "default_temperature")]
    pub smoothing_temperature: Option<f64>,
}

fn default_temperature() -> Option<f64> {
    Some(5.0)
}

impl Default for BlottoSpec {
    fn default() -> Self {
        Self { tokens: 100, areas: 7, smoothing_temperature: default_temperature() }
    }
}

impl BlottoSpec {
    pub fn validate(&self) -> Result<()> {
        if self.areas == 0 || (self.tokens as usize) < self.areas {
            return Err(Error::config(format!(
                "blotto needs tokens >= areas >= 1, got k={} a={}",
                self.tokens, self.areas
            )));
        }
        if let Some(t) = self.smoothing_temperature {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config(format!("smoothing_temperature must be positive, got {t}")));
            }
        }
        Ok(())
    }

    fn temperature(&self) -> Result<f64> {
        match self.smoothing_temperature {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(Error::config(format!("smoothing_temperature must be positive, got {t}"))),
            None => {
                Err(Error::Unsupported("blotto without smoothing_temperature has no differentiable surrogate".into()))
            }
        }
    }

    /// `softmax(logits)`; infinite logits are clamped.
    fn softmax(logits: &[f64]) -> Vec<f64> {
        let clamped: Vec<f64> = logits.iter().map(|x| x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)).collect();
        let max = clamped.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = clamped.iter().map(|x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / sum).collect()
    }

    /// Pre-rounding allocation `softmax(logits)·k`.
    pub fn continuous_allocation(&self, logits: &[f64]) -> Vec<f64> {
        let k = self.tokens as f64;
        Self::softmax(logits).into_iter().map(|s| s * k).collect()
    }

    /// Integer allocation summing exactly to `k`. Leftover tokens go to the
    /// largest fractional parts, ties broken by ascending area index.
    pub fn decode_allocation(&self, logits: &[f64]) -> Result<Vec<u32>> {
        if logits.len() != self.areas {
            return Err(Error::input(format!("expected {} logits, got {}", self.areas, logits.len())));
        }
        if logits.iter().any(|x| x.is_nan()) {
            return Err(Error::input("blotto logits contain NaN"));
        }
        let cont = self.continuous_allocation(logits);
        let mut alloc: Vec<u32> = cont.iter().map(|x| x.floor() as u32).collect();
        let assigned: u32 = alloc.iter().sum();
        let leftover = self.tokens.saturating_sub(assigned) as usize;
        let mut order: Vec<usize> = (0..self.areas).collect();
        order.sort_by(|&a, &b| {
            let fa = cont[a] - cont[a].floor();
            let fb = cont[b] - cont[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().take(leftover.min(self.areas)) {
            alloc[i] += 1;
        }
        Ok(alloc)
    }
}

/// `(areas won - areas lost) / a` for two integer allocations. Ties count for
/// neither side.
pub fn blotto_outcome(v: &[u32], w: &[u32]) -> f64 {
    debug_assert_eq!(v.len(), w.len());
    let net: i64 = v
        .iter()
        .zip(w)
        .map(|(a, b)| match a.cmp(b) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
        })
        .sum();
    net as f64 / v.len() as f64
}

impl TwoPlayerGame for BlottoSpec {
    fn dimension(&self) -> usize {
        self.areas
    }

    fn is_zero_sum(&self) -> bool {
        true
    }

    fn payoff(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        check_dims(self, v, w)?;
        Ok(blotto_outcome(&self.decode_allocation(v)?, &self.decode_allocation(w)?))
    }

    fn payoff_train(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        let tau = self.temperature()?;
        check_dims(self, v, w)?;
        let x = self.continuous_allocation(v);
        let y = self.continuous_allocation(w);
        let total: f64 = x.iter().zip(&y).map(|(a, b)| ((a - b) / tau).tanh()).sum();
        Ok(total / self.areas as f64)
    }

    fn payoff_grad(&self, v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let tau = self.temperature()?;
        check_dims(self, v, w)?;
        let s = Self::softmax(v);
        let k = self.tokens as f64;
        let y = self.continuous_allocation(w);
        let a = self.areas as f64;
        // d(loss)/d(allocation_i)
        let u: Vec<f64> = s
            .iter()
            .zip(&y)
            .map(|(si, yi)| {
                let t = ((si * k - yi) / tau).tanh();
                (1.0 - t * t) / (tau * a)
            })
            .collect();
        let su: f64 = s.iter().zip(&u).map(|(a, b)| a * b).sum();
        Ok(s.iter().zip(&u).map(|(sj, uj)| k * sj * (uj - su)).collect())
    }
}
