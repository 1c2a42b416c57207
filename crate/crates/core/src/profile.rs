//! Right-open radial step profiles `ρ : [0, ∞) → [0, ∞)`.
//!
//! A profile lists explicit plateaus `[b_i, b_{i+1})` on a window `[0, L)`
//! and then either vanishes or continues by maximal decay,
//! `ρ(t + Δ) = e^{-ε} ρ(t)`, replaying the window's last period. Plateau
//! values are right limits, which makes a nonincreasing profile lower
//! semicontinuous. All integrals are exact plateau sums; the decay tail is
//! summed in closed form.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::norms::NormSpec;
use crate::series::{ln_choose, ln_power_gap, PowerGeometricSums};
use crate::staircase::BandTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProfileTail {
    /// `ρ = 0` beyond the window.
    Zero,
    /// `ρ(t + Δ) = e^{-ε} ρ(t)` for `t ≥ L - Δ`; the window spans whole periods.
    MaximalDecay { eps: f64, delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    breaks: Vec<f64>,
    values: Vec<f64>,
    tail: ProfileTail,
}

impl RadialProfile {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>, tail: ProfileTail) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(invalid("profile needs at least one plateau and one more break than values"));
        }
        if breaks[0] != 0.0 {
            return Err(invalid("profile breaks must start at 0"));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0] || !w[1].is_finite()) {
            return Err(invalid("profile breaks must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("profile values must be finite and nonnegative"));
        }
        if let ProfileTail::MaximalDecay { eps, delta } = tail {
            if !(eps > 0.0 && delta > 0.0) {
                return Err(invalid("decay tail needs positive eps and delta"));
            }
            let periods = breaks[breaks.len() - 1] / delta;
            if periods < 1.0 - 1e-9 || (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) {
                return Err(invalid(format!(
                    "decay tail needs a window of whole periods, got {periods} periods"
                )));
            }
        }
        Ok(Self { breaks, values, tail })
    }

    /// The staircase profile of `table`: one period plus maximal decay.
    pub fn staircase(table: &BandTable) -> Self {
        let p = table.params();
        let a = table.normalizer();
        let (breaks, values) = if p.gamma <= 0.0 {
            (vec![0.0, p.delta], vec![a * (-p.eps).exp()])
        } else if p.gamma >= 1.0 {
            (vec![0.0, p.delta], vec![a])
        } else {
            (vec![0.0, p.gamma * p.delta, p.delta], vec![a, a * (-p.eps).exp()])
        };
        Self { breaks, values, tail: ProfileTail::MaximalDecay { eps: p.eps, delta: p.delta } }
    }

    /// `ln φ(t)` for the radial Laplace density
    /// `φ(t) = εⁿ/(|𝔹| n! Δⁿ) e^{-εt/Δ}`.
    pub fn ln_radial_laplace(eps: f64, delta: f64, norm: &NormSpec, t: f64) -> f64 {
        let n = norm.dim() as f64;
        n * eps.ln() - norm.ln_unit_ball_volume() - ln_gamma(n + 1.0) - n * delta.ln() - eps * t / delta
    }

    /// Left-endpoint restriction of the radial Laplace density to a uniform
    /// grid with `cells_per_period` cells per Δ (not renormalised).
    pub fn laplace_grid(eps: f64, delta: f64, norm: &NormSpec, cells_per_period: usize) -> Result<Self> {
        if cells_per_period == 0 {
            return Err(invalid("need at least one cell per period"));
        }
        let h = delta / cells_per_period as f64;
        let mut breaks: Vec<f64> = (0..cells_per_period).map(|j| j as f64 * h).collect();
        breaks.push(delta);
        let values = (0..cells_per_period)
            .map(|j| Self::ln_radial_laplace(eps, delta, norm, j as f64 * h).exp())
            .collect();
        Self::new(breaks, values, ProfileTail::MaximalDecay { eps, delta })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> ProfileTail {
        self.tail
    }

    pub fn window_end(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, &value)| Cell { start: w[0], end: w[1], value })
            .collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Window cells clipped to the final period `[L - Δ, L)`.
    fn last_period_cells(&self, delta: f64) -> Vec<Cell> {
        let end = self.window_end();
        let mut start = end - delta;
        // a break within rounding of `end - Δ` is the period start; otherwise
        // the previous cell would leave a sliver of a few ulps
        let tol = 1e-12 * end;
        if let Some(&b) = self.breaks.iter().find(|&&b| (b - start).abs() <= tol) {
            start = b;
        }
        self.cells()
            .into_iter()
            .filter(|c| c.end > start)
            .map(|c| Cell { start: c.start.max(start), ..c })
            .filter(|c| c.end > c.start)
            .collect()
    }

    pub fn value_at(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        let end = self.window_end();
        if r < end {
            let idx = self.breaks.partition_point(|&b| b <= r).saturating_sub(1);
            return self.values[idx.min(self.values.len() - 1)];
        }
        match self.tail {
            ProfileTail::Zero => 0.0,
            ProfileTail::MaximalDecay { eps, delta } => {
                let base = end - delta;
                let j = ((r - base) / delta).floor().max(1.0);
                let s = (r - j * delta).clamp(base, end - f64::EPSILON * end.max(1.0));
                let idx = self.breaks.partition_point(|&b| b <= s).saturating_sub(1);
                (-j * eps).exp() * self.values[idx.min(self.values.len() - 1)]
            }
        }
    }

    /// Explicit cells followed by tail cells, covering at least `[0, r_max)`.
    /// A zero tail contributes a single zero cell ending at `r_max`.
    pub fn cells_until(&self, r_max: f64) -> Vec<Cell> {
        let mut cells = self.cells();
        let end = self.window_end();
        match self.tail {
            ProfileTail::Zero => {
                if r_max > end {
                    cells.push(Cell { start: end, end: r_max, value: 0.0 });
                }
            }
            ProfileTail::MaximalDecay { eps, delta } => {
                let last = self.last_period_cells(delta);
                let mut j = 1.0;
                while end + (j - 1.0) * delta < r_max {
                    let f = (-j * eps).exp();
                    for c in &last {
                        // chain starts to the previous end so shifted cells stay contiguous
                        let start = cells.last().map_or(c.start + j * delta, |p| p.end);
                        let end = c.end + j * delta;
                        if end > start {
                            cells.push(Cell { start, end, value: c.value * f });
                        }
                    }
                    j += 1.0;
                }
            }
        }
        cells
    }

    /// `∫₀^∞ r^{m-1} ρ(r) dr` for `m ≥ 1`, exact.
    pub fn moment(&self, m: u32) -> f64 {
        assert!(m >= 1, "moment order starts at 1");
        let mf = f64::from(m);
        let explicit: f64 = self
            .cells()
            .iter()
            .filter(|c| c.value > 0.0)
            .map(|c| c.value * ln_power_gap(c.start, c.end, m).exp() / mf)
            .sum();
        match self.tail {
            ProfileTail::Zero => explicit,
            ProfileTail::MaximalDecay { eps, delta } => {
                // Σ_{j≥1} e^{-jε} ∫_{a+jΔ}^{b+jΔ} r^{m-1} dr
                //   = Σ_i C(m,i) Δ^i (b^{m-i} - a^{m-i}) Σ_{j≥1} j^i e^{-jε} / m
                let sums = PowerGeometricSums::new(m - 1, eps);
                let tail: f64 = self
                    .last_period_cells(delta)
                    .iter()
                    .filter(|c| c.value > 0.0)
                    .map(|c| {
                        let inner: f64 = (0..m)
                            .map(|i| {
                                (ln_choose(m, i)
                                    + f64::from(i) * delta.ln()
                                    + ln_power_gap(c.start, c.end, m - i)
                                    + sums.ln_sum_from_one(i))
                                .exp()
                            })
                            .sum();
                        c.value * inner / mf
                    })
                    .sum();
                explicit + tail
            }
        }
    }

    /// `∫ ρ(‖x‖) dx = |𝔹| n ∫ r^{n-1} ρ(r) dr`.
    pub fn radial_mass(&self, norm: &NormSpec) -> f64 {
        let n = norm.dim() as u32;
        norm.unit_ball_volume() * f64::from(n) * self.moment(n)
    }

    /// `E‖X‖` for the density `ρ(‖x‖)` (assumed normalised).
    pub fn mean_radius(&self, norm: &NormSpec) -> f64 {
        let n = norm.dim() as u32;
        norm.unit_ball_volume() * f64::from(n) * self.moment(n + 1)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            tail: self.tail,
        }
    }

    pub fn normalized(&self, norm: &NormSpec) -> Result<Self> {
        let mass = self.radial_mass(norm);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid(format!("profile mass {mass} cannot be normalised")));
        }
        Ok(self.scaled(1.0 / mass))
    }

    /// Applies `f` plateau-wise (the tail keeps its decay law, so `f` should
    /// commute with it when the tail is not zero).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            tail: self.tail,
        }
    }

    /// `Pr(‖X‖ ≤ r)` for the density `ρ(‖x‖)`.
    pub fn radial_cdf(&self, norm: &NormSpec, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let n = norm.dim() as u32;
        let mut total = 0.0;
        for c in self.cells_until(r) {
            if c.start >= r {
                break;
            }
            if c.value > 0.0 {
                total += c.value * ln_power_gap(c.start, c.end.min(r), n).exp();
            }
        }
        norm.unit_ball_volume() * total
    }

    /// True when values never increase, including across the tail join.
    pub fn is_nonincreasing(&self) -> bool {
        let rel = 1e-12;
        let window_ok = self.values.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel));
        let join_ok = match self.tail {
            ProfileTail::Zero => true,
            ProfileTail::MaximalDecay { eps, delta } => {
                let first_of_last = self.value_at(self.window_end() - delta);
                let last = self.values[self.values.len() - 1];
                (-eps).exp() * first_of_last <= last * (1.0 + rel)
            }
        };
        window_ok && join_ok
    }
}
