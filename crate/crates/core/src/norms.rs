//! ℓp norms on ℝⁿ: evaluation, unit-ball volume and cone-measure directions.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};

/// An ℓp norm on ℝⁿ, `1 ≤ p ≤ ∞`. `p = f64::INFINITY` selects the max norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    p: f64,
    dim: usize,
    #[serde(skip)]
    ln_unit_volume: f64,
}

impl NormSpec {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(invalid(format!("norm exponent must satisfy p ≥ 1, got {p}")));
        }
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        let n = dim as f64;
        // C_n = (2Γ(1+1/p))ⁿ / Γ(1+n/p); the cube [-1,1]ⁿ when p = ∞.
        let ln_unit_volume = if p.is_infinite() {
            n * std::f64::consts::LN_2
        } else {
            n * (std::f64::consts::LN_2 + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + n / p)
        };
        Ok(Self { p, dim, ln_unit_volume })
    }

    pub fn l1(dim: usize) -> Result<Self> {
        Self::new(1.0, dim)
    }

    pub fn l2(dim: usize) -> Result<Self> {
        Self::new(2.0, dim)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(f64::INFINITY, dim)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same exponent in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.p, dim)
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &[f64]) -> f64 {
        let max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if self.p.is_infinite() || max == 0.0 || !max.is_finite() {
            return max;
        }
        if self.p == 1.0 {
            return x.iter().map(|v| v.abs()).sum();
        }
        if self.p == 2.0 {
            return max * x.iter().map(|v| (v / max) * (v / max)).sum::<f64>().sqrt();
        }
        max * x.iter().map(|v| (v.abs() / max).powf(self.p)).sum::<f64>().powf(1.0 / self.p)
    }

    /// `ln |𝔹|`, the log-volume of the open unit ball.
    pub fn ln_unit_ball_volume(&self) -> f64 {
        self.ln_unit_volume
    }

    pub fn unit_ball_volume(&self) -> f64 {
        self.ln_unit_volume.exp()
    }

    /// `V(r) = C_n rⁿ`.
    pub fn ball_volume(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        (self.ln_unit_volume + self.dim as f64 * r.ln()).exp()
    }

    /// Draws a direction from the cone measure on the unit sphere.
    ///
    /// Coordinates are iid with density ∝ `exp(-|t|^p)` (uniform on `[-1,1]`
    /// for `p = ∞`) and the vector is divided by its norm. For `p = 1` the
    /// magnitudes are unit exponentials with independent signs.
    pub fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut u = vec![0.0; self.dim];
        self.sample_direction_into(rng, &mut u);
        u
    }

    pub fn sample_direction_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let magnitude = |rng: &mut R| -> f64 {
            if self.p.is_infinite() {
                rng.random::<f64>()
            } else if self.p == 1.0 {
                Exp1.sample(rng)
            } else {
                // |T| = W^{1/p}, W ~ Gamma(1/p, 1).
                let w: f64 = Gamma::new(1.0 / self.p, 1.0).expect("valid shape").sample(rng);
                w.powf(1.0 / self.p)
            }
        };
        loop {
            for v in out.iter_mut() {
                let m = magnitude(rng);
                *v = if rng.random::<bool>() { m } else { -m };
            }
            let norm = self.norm_unchecked(out);
            if norm > 0.0 && norm.is_finite() {
                out.iter_mut().for_each(|v| *v /= norm);
                let again = self.norm_unchecked(out);
                out.iter_mut().for_each(|v| *v /= again);
                return;
            }
        }
    }
}
