//! GMM-RPS(n): a point in the plane is mapped to `n` Gaussian pdf values that
//! act as strategy weights in a cyclic `n`-strategy matrix game with a 0.5
//! diagonal (a stronger rock beats a weaker rock).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_dims, TwoPlayerGame};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_MODE_STDDEV: f64 = 0.5;
pub const DEFAULT_RADIUS: f64 = 1.0;

/// The serialized form: geometry is derived from these three numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GmmRpsParams {
    n_modes: usize,
    #[serde(default = "default_stddev")]
    mode_stddev: f64,
    #[serde(default = "default_radius")]
    radius: f64,
}

fn default_stddev() -> f64 {
    DEFAULT_MODE_STDDEV
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GmmRpsParams", into = "GmmRpsParams")]
pub struct GmmRpsSpec {
    mode_centers: Vec<[f64; 2]>,
    mode_stddev: f64,
    radius: f64,
    game_matrix: Matrix,
}

impl TryFrom<GmmRpsParams> for GmmRpsSpec {
    type Error = Error;

    fn try_from(p: GmmRpsParams) -> Result<Self> {
        Self::with_geometry(p.n_modes, p.mode_stddev, p.radius)
    }
}

impl From<GmmRpsSpec> for GmmRpsParams {
    fn from(s: GmmRpsSpec) -> Self {
        GmmRpsParams { n_modes: s.n_modes(), mode_stddev: s.mode_stddev, radius: s.radius }
    }
}

impl GmmRpsSpec {
    /// Modes on the unit circle with stddev 0.5.
    pub fn new(n_modes: usize) -> Result<Self> {
        Self::with_geometry(n_modes, DEFAULT_MODE_STDDEV, DEFAULT_RADIUS)
    }

    /// `n_modes` must be odd and at least 3 so that every mode beats exactly
    /// half of the others.
    pub fn with_geometry(n_modes: usize, mode_stddev: f64, radius: f64) -> Result<Self> {
        if n_modes < 3 || n_modes.is_multiple_of(2) {
            return Err(Error::config(format!("n_modes must be odd and >= 3, got {n_modes}")));
        }
        if !(mode_stddev > 0.0 && mode_stddev.is_finite()) {
            return Err(Error::config(format!("mode_stddev must be positive, got {mode_stddev}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::config(format!("radius must be positive, got {radius}")));
        }
        let mode_centers = (0..n_modes)
            .map(|i| {
                let angle = PI / 2.0 + 2.0 * PI * i as f64 / n_modes as f64;
                [radius * angle.cos(), radius * angle.sin()]
            })
            .collect();
        Ok(Self { mode_centers, mode_stddev, radius, game_matrix: cyclic_game_matrix(n_modes) })
    }

    pub fn validate(&self) -> Result<()> {
        Self::with_geometry(self.n_modes(), self.mode_stddev, self.radius).map(|_| ())
    }

    pub fn n_modes(&self) -> usize {
        self.mode_centers.len()
    }

    pub fn mode_centers(&self) -> &[[f64; 2]] {
        &self.mode_centers
    }

    pub fn mode_stddev(&self) -> f64 {
        self.mode_stddev
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn game_matrix(&self) -> &Matrix {
        &self.game_matrix
    }

    /// Height of every mode's pdf at its own center.
    pub fn peak_density(&self) -> f64 {
        1.0 / (2.0 * PI * self.mode_stddev * self.mode_stddev)
    }

    /// Isotropic Gaussian pdf of every mode at `x`. Not normalized across
    /// modes: the magnitude carries the strategy's strength.
    pub fn gmm_weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != 2 {
            return Err(Error::input(format!("GMM-RPS strategies are 2D, got {}", x.len())));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::input("GMM-RPS strategy has non-finite coordinates"));
        }
        Ok(self.weights_unchecked(x))
    }

    fn weights_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let var = self.mode_stddev * self.mode_stddev;
        let peak = self.peak_density();
        self.mode_centers
            .iter()
            .map(|c| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                peak * (-d2 / (2.0 * var)).exp()
            })
            .collect()
    }
}

/// 0.5 on the diagonal; mode `i` beats the next `(n-1)/2` modes (mod n) and
/// loses to the rest.
fn cyclic_game_matrix(n: usize) -> Matrix {
    let half = (n - 1) / 2;
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.5
        } else if (j + n - i) % n <= half {
            1.0
        } else {
            -1.0
        }
    })
}

impl TwoPlayerGame for GmmRpsSpec {
    fn dimension(&self) -> usize {
        2
    }

    fn is_zero_sum(&self) -> bool {
        false
    }

    fn payoff(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        check_dims(self, v, w)?;
        let gv = self.weights_unchecked(v);
        let gw = self.weights_unchecked(w);
        Ok(self.game_matrix.bilinear(&gv, &gw))
    }

    fn payoff_train(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        self.payoff(v, w)
    }

    fn payoff_grad(&self, v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        check_dims(self, v, w)?;
        let gv = self.weights_unchecked(v);
        let coeff = self.game_matrix.mul_vec(&self.weights_unchecked(w));
        let var = self.mode_stddev * self.mode_stddev;
        let mut grad = [0.0; 2];
        for ((c, g), k) in self.mode_centers.iter().zip(&gv).zip(&coeff) {
            let s = k * g / var;
            grad[0] += s * (c[0] - v[0]);
            grad[1] += s * (c[1] - v[1]);
        }
        Ok(grad.to_vec())
    }
}
