//! Decision procedures for the ε-DP characterisations of additive noise.
//!
//! A density `f` gives an ε-DP additive mechanism when `f(x) ≤ e^ε f(y)`
//! for all `‖x - y‖ ≤ Δ`. For radial densities `f(x) = ρ(‖x‖)` this is the
//! statement that `ρ` is 1-Lipschitz for `d(r, s) = ε⌈|r - s|/Δ⌉`, and
//! equivalently that superlevel sets grow into lower ones under the
//! matching enlargement. Step profiles make each check a finite plateau
//! comparison, so the profile checks here are exact decisions. The pair
//! fuzzer is the sampling-based cross-check for arbitrary radial densities.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::norms::NormSpec;
use crate::profile::{Cell, ProfileTail, RadialProfile};
use crate::rng::{self, shard_layout};
use crate::series::ln_power_gap;
use crate::staircase::BandTable;

/// Relative slack used when comparing log-density gaps against `ε`-multiples.
const LOG_SLACK: f64 = 1e-12;

/// A radially symmetric density `f(x) = ρ(‖x‖)` with a radius sampler.
pub trait RadialDensity: Sync {
    fn norm(&self) -> &NormSpec;
    /// `ln ρ(r)`, `-∞` where the density vanishes.
    fn ln_density_at_radius(&self, r: f64) -> f64;
    /// Radii in `[0, r_max]` where `ρ` jumps.
    fn breakpoints(&self, r_max: f64) -> Vec<f64>;
    /// A radius beyond which the law has negligible mass.
    fn effective_radius(&self) -> f64;
    fn sample_radius(&self, rng: &mut dyn RngCore) -> f64;
}

impl RadialDensity for BandTable {
    fn norm(&self) -> &NormSpec {
        &self.params().norm
    }

    fn ln_density_at_radius(&self, r: f64) -> f64 {
        BandTable::ln_density_at_radius(self, r)
    }

    fn breakpoints(&self, r_max: f64) -> Vec<f64> {
        let p = self.params();
        let mut out = Vec::new();
        let mut k = 0.0;
        while k * p.delta <= r_max {
            out.push(k * p.delta);
            let mid = (k + p.gamma) * p.delta;
            if p.gamma > 0.0 && p.gamma < 1.0 && mid <= r_max {
                out.push(mid);
            }
            k += 1.0;
        }
        out
    }

    fn effective_radius(&self) -> f64 {
        (self.k_max() + 1) as f64 * self.params().delta
    }

    fn sample_radius(&self, rng: &mut dyn RngCore) -> f64 {
        self.sample_radii(rng, 1)[0].1
    }
}

/// `ρ(r) ∝ e^{-rate·r}`, normalised. At rate `ε/Δ` this is the radial
/// Laplace comparator; at `2ε/Δ` it violates ε-DP.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialRadial {
    rate: f64,
    norm: NormSpec,
    ln_scale: f64,
}

impl ExponentialRadial {
    pub fn new(rate: f64, norm: NormSpec) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!("rate must be positive, got {rate}")));
        }
        let n = norm.dim() as f64;
        let ln_scale = n * rate.ln() - norm.ln_unit_ball_volume() - statrs::function::gamma::ln_gamma(n + 1.0);
        Ok(Self { rate, norm, ln_scale })
    }

    pub fn laplace(eps: f64, delta: f64, norm: NormSpec) -> Result<Self> {
        Self::new(eps / delta, norm)
    }
}

impl RadialDensity for ExponentialRadial {
    fn norm(&self) -> &NormSpec {
        &self.norm
    }

    fn ln_density_at_radius(&self, r: f64) -> f64 {
        self.ln_scale - self.rate * r
    }

    fn breakpoints(&self, _r_max: f64) -> Vec<f64> {
        vec![0.0]
    }

    fn effective_radius(&self) -> f64 {
        let n = self.norm.dim() as f64;
        (n + 40.0 + 10.0 * n.sqrt()) / self.rate
    }

    fn sample_radius(&self, rng: &mut dyn RngCore) -> f64 {
        let n = self.norm.dim() as f64;
        Gamma::new(n, 1.0 / self.rate).expect("positive shape and scale").sample(rng)
    }
}

/// A step profile used as a density, with an inverse-transform sampler
/// over its plateaus.
#[derive(Debug, Clone)]
pub struct ProfileDensity {
    profile: RadialProfile,
    norm: NormSpec,
    cells: Vec<Cell>,
    cumulative: Vec<f64>,
}

impl ProfileDensity {
    /// Normalises `profile` and tabulates its shells until the remaining
    /// mass is below `1e-15`.
    pub fn new(profile: &RadialProfile, norm: NormSpec) -> Result<Self> {
        let profile = profile.normalized(&norm)?;
        let n = norm.dim() as u32;
        let unit = norm.unit_ball_volume();
        let mut reach = profile.window_end();
        let mut previous = f64::NEG_INFINITY;
        let (cells, cumulative) = loop {
            let cells = profile.cells_until(reach);
            let mut acc = 0.0;
            let cumulative: Vec<f64> = cells
                .iter()
                .map(|c| {
                    if c.value > 0.0 {
                        acc += unit * c.value * ln_power_gap(c.start, c.end, n).exp();
                    }
                    acc
                })
                .collect();
            // rounding can leave the total a few ulps short of 1; stop once
            // doubling the reach no longer adds mass
            if acc >= 1.0 - 1e-15 || acc <= previous || matches!(profile.tail(), ProfileTail::Zero) {
                break (cells, cumulative);
            }
            previous = acc;
            reach *= 2.0;
        };
        Ok(Self { profile, norm, cells, cumulative })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }
}

impl RadialDensity for ProfileDensity {
    fn norm(&self) -> &NormSpec {
        &self.norm
    }

    fn ln_density_at_radius(&self, r: f64) -> f64 {
        self.profile.value_at(r).ln()
    }

    fn breakpoints(&self, r_max: f64) -> Vec<f64> {
        self.profile
            .cells_until(r_max)
            .iter()
            .map(|c| c.start)
            .filter(|&b| b <= r_max)
            .collect()
    }

    fn effective_radius(&self) -> f64 {
        self.cells.last().map_or(0.0, |c| c.end)
    }

    fn sample_radius(&self, rng: &mut dyn RngCore) -> f64 {
        let total = *self.cumulative.last().expect("profile has cells");
        let u: f64 = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.cells.len() - 1);
        let c = self.cells[idx];
        let v: f64 = rng.random();
        radius_in_shell(c.start, c.end, self.norm.dim() as f64, v)
    }
}

/// Radius of the uniform law on the shell `a ≤ ‖x‖ < b` at quantile `u`.
fn radius_in_shell(a: f64, b: f64, n: f64, u: f64) -> f64 {
    let ratio = (a / b).powf(n);
    (b * (u * (1.0 - ratio) + ratio).powf(1.0 / n)).clamp(a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpReport {
    /// Largest observed `f(x)/f(y)` over tested pairs with `‖x - y‖ ≤ Δ`.
    pub max_ratio: f64,
    pub witness_pair: (Vec<f64>, Vec<f64>),
    pub passed: bool,
    pub pairs_tested: u64,
}

#[derive(Debug, Clone)]
struct Worst {
    ln_ratio: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Worst {
    fn none() -> Self {
        Self { ln_ratio: f64::NEG_INFINITY, x: vec![], y: vec![] }
    }

    /// Records both orientations of the pair `(x, y)`.
    fn offer(&mut self, density: &dyn RadialDensity, x: &[f64], y: &[f64]) {
        let norm = density.norm();
        let (lx, ly) = (
            density.ln_density_at_radius(norm.norm_unchecked(x)),
            density.ln_density_at_radius(norm.norm_unchecked(y)),
        );
        for (num, den, a, b) in [(lx, ly, x, y), (ly, lx, y, x)] {
            let ln_ratio = if num == f64::NEG_INFINITY {
                continue;
            } else {
                num - den
            };
            if ln_ratio > self.ln_ratio {
                *self = Self { ln_ratio, x: a.to_vec(), y: b.to_vec() };
            }
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.ln_ratio > self.ln_ratio {
            other
        } else {
            self
        }
    }
}

/// Fuzzes `f(x)/f(y)` over `n_pairs` random pairs with `‖x - y‖ ≤ Δ` and a
/// deterministic set of pairs straddling every breakpoint.
///
/// Random base points come from the density's own sampler; partners are
/// `y = x + tΔU` with `t` uniform and `U` a cone-measure direction. The
/// adversarial pairs lie on the first axis: each breakpoint `b` is paired
/// with its neighbouring floats and with points at distance `Δ(1 - 1e-12)`.
pub fn check_ratio_pairs(
    density: &dyn RadialDensity,
    eps: f64,
    delta: f64,
    seed: u64,
    n_pairs: usize,
) -> Result<DpReport> {
    if !(eps > 0.0 && delta > 0.0) {
        return Err(invalid("eps and delta must be positive"));
    }
    let norm = *density.norm();
    let dim = norm.dim();
    let random: Worst = rng::with_pool(|| {
        shard_layout(n_pairs)
            .into_par_iter()
            .map(|(shard, len)| {
                let mut r = rng::substream(seed, "verify", shard);
                let mut worst = Worst::none();
                let mut y = vec![0.0; dim];
                for _ in 0..len {
                    let radius = density.sample_radius(&mut r);
                    let mut x = norm.sample_direction(&mut r);
                    x.iter_mut().for_each(|v| *v *= radius);
                    let t: f64 = r.random();
                    norm.sample_direction_into(&mut r, &mut y);
                    y.iter_mut().zip(&x).for_each(|(u, xi)| *u = xi + t * delta * *u);
                    worst.offer(density, &x, &y);
                }
                worst
            })
            .reduce(Worst::none, Worst::merge)
    });

    let axis = |s: f64| {
        let mut v = vec![0.0; dim];
        v[0] = s;
        v
    };
    let reach = delta * (1.0 - 1e-12);
    let mut worst = Worst::none();
    let mut adversarial = 0u64;
    let mut pair = |w: &mut Worst, s: f64, t: f64| {
        w.offer(density, &axis(s), &axis(t));
        adversarial += 1;
    };
    for b in density.breakpoints(density.effective_radius() + delta) {
        let probes = [b.next_down().max(0.0), b, b.next_up()];
        pair(&mut worst, probes[0], probes[2]);
        pair(&mut worst, probes[0], probes[1]);
        for s in probes {
            pair(&mut worst, s, s + reach);
            pair(&mut worst, s, s - reach);
        }
    }
    let worst = worst.merge(random);
    let max_ratio = worst.ln_ratio.exp();
    Ok(DpReport {
        max_ratio,
        witness_pair: (worst.x, worst.y),
        passed: worst.ln_ratio <= eps + (1.0 + 1e-12f64).ln(),
        pairs_tested: n_pairs as u64 + adversarial,
    })
}

/// Number of whole periods needed to span `gap / Δ` when the ratio is within
/// rounding of an integer.
fn snapped_periods(gap: f64, delta: f64) -> f64 {
    let t = gap / delta;
    if (t - t.round()).abs() <= 1e-9 * t.max(1.0) {
        t.round()
    } else {
        t.floor()
    }
}

/// Decides `|ln ρ(r) - ln ρ(s)| ≤ ε⌈|r - s|/Δ⌉` for all `r, s ≥ 0`.
///
/// For plateaus `[a_i, b_i)` and `[a_j, b_j)` with gap `g = a_j - b_i`, the
/// smallest admissible distance is just above `g`, so the bound is
/// `ε(⌊g/Δ⌋ + 1)`. Pairs beyond two tail periods repeat earlier ones.
pub fn check_radial_loglip(profile: &RadialProfile, eps: f64, delta: f64) -> bool {
    let cells = profile.cells_until(profile.window_end() + 2.0 * delta);
    for (i, ci) in cells.iter().enumerate() {
        for cj in &cells[i + 1..] {
            if ci.value == 0.0 && cj.value == 0.0 {
                continue;
            }
            if ci.value == 0.0 || cj.value == 0.0 {
                return false;
            }
            let gap = (cj.start - ci.end).max(0.0);
            let bound = eps * (snapped_periods(gap, delta) + 1.0);
            if (ci.value.ln() - cj.value.ln()).abs() > bound * (1.0 + LOG_SLACK) {
                return false;
            }
        }
    }
    true
}

/// Decides membership in the maximal-decay class: nonincreasing right-open
/// plateaus (hence lower semicontinuous) with `ρ(t + Δ) = e^{-ε} ρ(t)`,
/// checked on every cell of the merged breakpoint grid.
pub fn check_maximal_decay(profile: &RadialProfile, eps: f64, delta: f64, tol: f64) -> bool {
    match profile.tail() {
        ProfileTail::MaximalDecay { eps: e, delta: d } => {
            if (e - eps).abs() > tol * eps || (d - delta).abs() > tol * delta {
                return false;
            }
        }
        ProfileTail::Zero => return false,
    }
    if !profile.is_nonincreasing() {
        return false;
    }
    let end = profile.window_end();
    let mut grid: Vec<f64> = profile.breaks().to_vec();
    grid.extend(profile.breaks().iter().map(|b| b - delta).filter(|&b| b > 0.0));
    grid.push(end - delta);
    grid.retain(|&b| b >= 0.0 && b <= end - delta);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * delta);
    let factor = (-eps).exp();
    grid.windows(2).all(|w| {
        let t = 0.5 * (w[0] + w[1]);
        let (here, there) = (profile.value_at(t), profile.value_at(t + delta));
        (there - factor * here).abs() <= tol * here.max(there)
    })
}

/// `γ(h) = Δ(⌈h/ε⌉ - 1)`, the ball radius realising the `h`-enlargement
/// under `d(x, y) = ε⌈‖x - y‖/Δ⌉`. `h/ε` within a few ulps of an integer is
/// treated as that integer.
pub fn enlargement_radius(h: f64, eps: f64, delta: f64) -> f64 {
    let t = h / eps;
    let c = if (t - t.round()).abs() <= 4.0 * f64::EPSILON * t.max(1.0) {
        t.round()
    } else {
        t.ceil()
    };
    delta * (c - 1.0).max(0.0)
}

/// Union of plateau intervals where `ρ > level`, up to `reach`.
fn superlevel_intervals(cells: &[Cell], level: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for c in cells.iter().filter(|c| c.value > level) {
        match out.last_mut() {
            Some(last) if last.1 >= c.start => last.1 = last.1.max(c.end),
            _ => out.push((c.start, c.end)),
        }
    }
    out
}

/// Decides `{ρ > λ}_h ⊆ {ρ > λe^{-h}}` for each `(λ, h)`.
///
/// The enlargement of a radial annulus `[a, b)` by the closed ball of radius
/// `γ(h)` is `[max(0, a - γ), b + γ)`. Endpoints that agree to a relative
/// `1e-12` count as contained; such exact-boundary cases are not decidable
/// in floating point.
pub fn check_levelset_enlargement(
    profile: &RadialProfile,
    eps: f64,
    delta: f64,
    lambdas: &[f64],
    hs: &[f64],
) -> bool {
    let max_value = profile.max_value();
    for &lambda in lambdas {
        if lambda >= max_value {
            continue;
        }
        for &h in hs {
            let gamma = enlargement_radius(h, eps, delta);
            let lower = lambda * (-h).exp();
            let reach = match profile.tail() {
                ProfileTail::Zero => profile.window_end() + gamma + delta,
                ProfileTail::MaximalDecay { eps: e, delta: d } => {
                    let periods = if lower > 0.0 { ((max_value / lower).ln() / e).ceil().max(0.0) } else { 1e6 };
                    profile.window_end() + d * (periods + 2.0) + gamma
                }
            };
            let cells = profile.cells_until(reach);
            let source = superlevel_intervals(&cells, lambda);
            let target = superlevel_intervals(&cells, lower);
            let slack = 1e-12 * reach.max(delta);
            for (a, b) in source {
                let (lo, hi) = ((a - gamma).max(0.0), b + gamma);
                let covered = target.iter().any(|&(ta, tb)| ta <= lo + slack && tb >= hi - slack);
                if !covered {
                    return false;
                }
            }
        }
    }
    true
}

/// Levels just below every positive plateau value and enlargements just
/// above `kε` for `k = 1..=max_multiple`: the tight probes for step profiles.
pub fn canonical_probes(profile: &RadialProfile, eps: f64, max_multiple: u32) -> (Vec<f64>, Vec<f64>) {
    let mut lambdas: Vec<f64> = profile.values().iter().copied().filter(|&v| v > 0.0).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let lambdas = lambdas.into_iter().map(|v| v * (1.0 - 1e-9)).collect();
    let hs = (1..=max_multiple).map(|k| f64::from(k) * eps * (1.0 + 1e-9)).collect();
    (lambdas, hs)
}

/// Extreme values of `ln(ρ/φ)` over the window, with `φ` the radial Laplace
/// density; each plateau is compared with `φ` at both of its ends.
pub fn laplace_sandwich_bounds(profile: &RadialProfile, eps: f64, delta: f64, norm: &NormSpec) -> (f64, f64) {
    let ln_phi = |t: f64| RadialProfile::ln_radial_laplace(eps, delta, norm, t);
    profile.cells().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
        let v = c.value.ln();
        (lo.min(v - ln_phi(c.start)), hi.max(v - ln_phi(c.end)))
    })
}

/// Decides `e^{-2ε}φ ≤ ρ ≤ e^{2ε}φ`. Beyond the window both sides decay by
/// `e^{-ε}` per period, so the window decides it.
pub fn laplace_sandwich_check(profile: &RadialProfile, eps: f64, delta: f64, norm: &NormSpec) -> Result<bool> {
    if !check_maximal_decay(profile, eps, delta, 1e-9) {
        return Err(Error::Precondition("profile is not in the maximal-decay class".into()));
    }
    let mass = profile.radial_mass(norm);
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("profile integrates to {mass}, not 1")));
    }
    let (lo, hi) = laplace_sandwich_bounds(profile, eps, delta, norm);
    let slack = 2.0 * eps * LOG_SLACK + 1e-12;
    Ok(lo >= -2.0 * eps - slack && hi <= 2.0 * eps + slack)
}
