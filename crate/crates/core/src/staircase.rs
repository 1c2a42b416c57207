//! The staircase density, its band table and the two-stage sampler.
//!
//! For offset γ the radial profile takes the value `a(γ)e^{-kε}` on
//! `[kΔ, (k+γ)Δ)` and `a(γ)e^{-(k+1)ε}` on `[(k+γ)Δ, (k+1)Δ)`. Intervals are
//! right-open, so a radius exactly on a breakpoint takes the lower plateau.
//!
//! Band masses are proportional to `e^{-kε}((k+γ)ⁿ - kⁿ)` and
//! `e^{-(k+1)ε}((k+1)ⁿ - (k+γ)ⁿ)`; the unit-ball constant cancels. The
//! normaliser `a(γ)` comes from the untruncated series (see [`crate::series`]),
//! so plateau values carry no truncation error. Only the sampling pmf is
//! truncated, at the smallest `K` whose geometric tail bound is below the
//! configured tolerance.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::norms::NormSpec;
use crate::rng::{self, shard_layout};
use crate::series::{ln_choose, ln_power_gap, log_sum_exp, PowerGeometricSums};

/// Default truncation tolerance for the band pmf.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Band tables at or above this size sample through an alias table.
const ALIAS_MIN_K: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaircaseParams {
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    pub norm: NormSpec,
}

impl StaircaseParams {
    pub fn new(eps: f64, delta: f64, gamma: f64, norm: NormSpec) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("eps must be positive and finite, got {eps}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid(format!("delta must be positive and finite, got {delta}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(invalid(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        Ok(Self { eps, delta, gamma, norm })
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.eps, self.delta, gamma, self.norm)
    }

    pub fn dim(&self) -> u32 {
        self.norm.dim() as u32
    }
}

/// Which of the two plateaus of period `k` a band covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Plateau {
    /// `[k, k+γ)`, value `a e^{-kε}` (band index 1).
    Upper,
    /// `[k+γ, k+1)`, value `a e^{-(k+1)ε}` (band index 2).
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Band {
    pub k: u64,
    pub plateau: Plateau,
}

impl Band {
    pub fn new(k: u64, plateau: Plateau) -> Self {
        Self { k, plateau }
    }

    /// Radius interval `[a, b]` in units of Δ.
    pub fn unit_interval(&self, gamma: f64) -> (f64, f64) {
        let k = self.k as f64;
        match self.plateau {
            Plateau::Upper => (k, k + gamma),
            Plateau::Lower => (k + gamma, k + 1.0),
        }
    }

    /// Exponent `j` of the plateau value `a e^{-jε}`.
    pub fn decay_index(&self) -> u64 {
        match self.plateau {
            Plateau::Upper => self.k,
            Plateau::Lower => self.k + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandWeight {
    pub band: Band,
    pub prob: f64,
}

#[derive(Debug, Clone)]
enum BandSampler {
    Linear { cumulative: Vec<f64> },
    Alias(WeightedAliasIndex<f64>),
}

/// Truncated, renormalised band pmf plus the exact normaliser `a(γ)`.
#[derive(Debug, Clone)]
pub struct BandTable {
    params: StaircaseParams,
    k_max: u64,
    weights: Vec<BandWeight>,
    ln_series: f64,
    ln_normalizer: f64,
    tail_mass: f64,
    support: Vec<Band>,
    sampler: BandSampler,
}

/// `ln Σ_k [e^{-kε}((k+γ)ⁿ-kⁿ) + e^{-(k+1)ε}((k+1)ⁿ-(k+γ)ⁿ)]`, untruncated.
pub fn ln_staircase_series(eps: f64, gamma: f64, n: u32) -> f64 {
    let sums = PowerGeometricSums::new(n.saturating_sub(1), eps);
    let ln_x = -eps;
    let ln_one_minus_x = (-(-eps).exp_m1()).ln();
    log_sum_exp((0..n).map(|j| {
        // coefficient γ^{n-j}(1-x) + x
        let ln_gpow = f64::from(n - j) * gamma.ln();
        let coef = log_sum_exp([ln_gpow + ln_one_minus_x, ln_x]);
        ln_choose(n, j) + coef + sums.ln_sum(j)
    }))
}

impl BandTable {
    pub fn build(params: &StaircaseParams, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(invalid(format!("tail tolerance must lie in (0, 1), got {tail_tol}")));
        }
        let params = StaircaseParams::new(params.eps, params.delta, params.gamma, params.norm)?;
        let n = params.dim();
        let eps = params.eps;
        let ln_series = ln_staircase_series(eps, params.gamma, n);
        let ln_normalizer =
            -ln_series - params.norm.ln_unit_ball_volume() - f64::from(n) * params.delta.ln();

        // Per-period bound terms e^{-kε}((k+1)ⁿ-kⁿ) and exact period masses,
        // walked until the remainder is negligible against the tolerance.
        let ln_tol = tail_tol.ln();
        let mut ln_bound_terms: Vec<f64> = Vec::new();
        let mut period_mass: Vec<f64> = Vec::new();
        let mut k: u64 = 0;
        let remainder_ln = loop {
            let kf = k as f64;
            let ln_t = -kf * eps + ln_power_gap(kf, kf + 1.0, n) - ln_series;
            let mass = Self::ln_mass_raw(&params, ln_series, Band::new(k, Plateau::Upper)).exp()
                + Self::ln_mass_raw(&params, ln_series, Band::new(k, Plateau::Lower)).exp();
            period_mass.push(mass);
            if let Some(&prev) = ln_bound_terms.last() {
                let ln_ratio: f64 = ln_t - prev;
                if ln_ratio < 0.0 {
                    let r = ln_ratio.exp();
                    let ln_rem = ln_t + ln_ratio - (1.0 - r).ln();
                    if ln_rem < ln_tol - 30.0 || ln_t < -745.0 {
                        ln_bound_terms.push(ln_t);
                        break ln_rem;
                    }
                }
            }
            ln_bound_terms.push(ln_t);
            k += 1;
            if k > 50_000_000 {
                return Err(invalid("band table does not converge; eps too small"));
            }
        };

        // suffix[k] = Σ_{j ≥ k} bound terms (+ remainder)
        let len = ln_bound_terms.len();
        let mut suffix = vec![0.0; len + 1];
        suffix[len] = remainder_ln.exp();
        let mut mass_suffix = vec![0.0; len + 1];
        mass_suffix[len] = remainder_ln.exp();
        for i in (0..len).rev() {
            suffix[i] = suffix[i + 1] + ln_bound_terms[i].exp();
            mass_suffix[i] = mass_suffix[i + 1] + period_mass[i];
        }
        let k_max = (0..len).find(|&kk| suffix[kk + 1] < tail_tol).unwrap_or(len - 1) as u64;
        let tail_mass = mass_suffix[k_max as usize + 1].min(suffix[k_max as usize + 1]);

        let mut weights = Vec::with_capacity(2 * (k_max as usize + 1));
        for kk in 0..=k_max {
            for plateau in [Plateau::Upper, Plateau::Lower] {
                let band = Band::new(kk, plateau);
                let prob = Self::ln_mass_raw(&params, ln_series, band).exp();
                weights.push(BandWeight { band, prob });
            }
        }
        let retained: f64 = weights.iter().map(|w| w.prob).sum();
        weights.iter_mut().for_each(|w| w.prob /= retained);

        let positive: Vec<&BandWeight> = weights.iter().filter(|w| w.prob > 0.0).collect();
        let support: Vec<Band> = positive.iter().map(|w| w.band).collect();
        let sampler = if k_max >= ALIAS_MIN_K {
            let alias = WeightedAliasIndex::new(positive.iter().map(|w| w.prob).collect())
                .map_err(|e| invalid(format!("alias table: {e}")))?;
            BandSampler::Alias(alias)
        } else {
            let mut acc = 0.0;
            let mut cumulative: Vec<f64> = positive
                .iter()
                .map(|w| {
                    acc += w.prob;
                    acc
                })
                .collect();
            if let Some(last) = cumulative.last_mut() {
                *last = f64::INFINITY;
            }
            BandSampler::Linear { cumulative }
        };

        Ok(Self {
            params,
            k_max,
            weights,
            ln_series,
            ln_normalizer,
            tail_mass,
            support,
            sampler,
        })
    }

    fn ln_mass_raw(params: &StaircaseParams, ln_series: f64, band: Band) -> f64 {
        let (a, b) = band.unit_interval(params.gamma);
        -(band.decay_index() as f64) * params.eps + ln_power_gap(a, b, params.dim()) - ln_series
    }

    pub fn params(&self) -> &StaircaseParams {
        &self.params
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    /// Renormalised weights for `k ≤ k_max`, ordered by `(k, plateau)`;
    /// empty bands are listed with probability zero.
    pub fn weights(&self) -> &[BandWeight] {
        &self.weights
    }

    pub fn weight(&self, band: Band) -> f64 {
        if band.k > self.k_max {
            return 0.0;
        }
        let idx = 2 * band.k as usize + usize::from(band.plateau == Plateau::Lower);
        self.weights[idx].prob
    }

    /// `a(γ)`.
    pub fn normalizer(&self) -> f64 {
        self.ln_normalizer.exp()
    }

    pub fn ln_normalizer(&self) -> f64 {
        self.ln_normalizer
    }

    /// Probability mass beyond `k_max` before renormalisation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Untruncated mass `Pr(‖X‖ ∈ B_{k,i})` for any band.
    pub fn band_mass(&self, band: Band) -> f64 {
        Self::ln_mass_raw(&self.params, self.ln_series, band).exp()
    }

    /// `ln f(x)` as a function of `r = ‖x‖`; exact plateau value.
    pub fn ln_density_at_radius(&self, r: f64) -> f64 {
        let p = &self.params;
        let t = r / p.delta;
        let mut k = t.floor().max(0.0);
        // keep kΔ ≤ r < (k+1)Δ in floating point
        if k * p.delta > r && k > 0.0 {
            k -= 1.0;
        } else if (k + 1.0) * p.delta <= r {
            k += 1.0;
        }
        let j = if r < (k + p.gamma) * p.delta { k } else { k + 1.0 };
        self.ln_normalizer - j * p.eps
    }

    pub fn density_at_radius(&self, r: f64) -> f64 {
        self.ln_density_at_radius(r).exp()
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.density_at_radius(self.params.norm.norm(x)?))
    }

    /// Analytic `Pr(‖X‖ ≤ r)` of the untruncated law.
    pub fn radial_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let p = &self.params;
        let n = p.dim();
        let s = r / p.delta;
        let mut total = 0.0;
        let mut k: u64 = 0;
        loop {
            let mut done = false;
            for plateau in [Plateau::Upper, Plateau::Lower] {
                let band = Band::new(k, plateau);
                let (a, b) = band.unit_interval(p.gamma);
                if b <= a {
                    continue;
                }
                if s >= b {
                    total += self.band_mass(band);
                } else {
                    if s > a {
                        let ln_part = -(band.decay_index() as f64) * p.eps + ln_power_gap(a, s, n)
                            - self.ln_series;
                        total += ln_part.exp();
                    }
                    done = true;
                    break;
                }
            }
            if done {
                break;
            }
            k += 1;
        }
        total.min(1.0)
    }

    fn draw_band<R: Rng + ?Sized>(&self, rng: &mut R) -> Band {
        match &self.sampler {
            BandSampler::Alias(alias) => self.support[alias.sample(rng)],
            BandSampler::Linear { cumulative } => {
                let u: f64 = rng.random();
                let idx = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
                self.support[idx]
            }
        }
    }

    /// One draw written into `out`; returns its band.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Band {
        let band = self.draw_band(rng);
        let u: f64 = rng.random();
        let r = radius_from_uniform(&self.params, band, u).expect("support bands are nonempty");
        self.params.norm.sample_direction_into(rng, out);
        out.iter_mut().for_each(|v| *v *= r);
        band
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Vec<f64>> {
        let n = self.params.norm.dim();
        (0..count)
            .map(|_| {
                let mut x = vec![0.0; n];
                self.sample_into(rng, &mut x);
                x
            })
            .collect()
    }

    /// Radius-only draws, `‖X‖`, with their bands.
    pub fn sample_radii<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<(Band, f64)> {
        (0..count)
            .map(|_| {
                let band = self.draw_band(rng);
                let u: f64 = rng.random();
                (band, radius_from_uniform(&self.params, band, u).expect("nonempty band"))
            })
            .collect()
    }

    /// `count` draws split over fixed shards, each on its own substream of
    /// `seed` under `tag`. Output order is shard order, independent of the
    /// number of worker threads.
    pub fn sample_sharded(&self, seed: u64, tag: &str, count: usize) -> Vec<Vec<f64>> {
        let shards: Vec<Vec<Vec<f64>>> = rng::with_pool(|| {
            shard_layout(count)
                .into_par_iter()
                .map(|(shard, len)| {
                    let mut r = rng::substream(seed, tag, shard);
                    self.sample(&mut r, len)
                })
                .collect()
        });
        shards.into_iter().flatten().collect()
    }
}

/// Inverse-transform radius inside band `(k, i)`:
/// `R = Δ (u(bⁿ - aⁿ) + aⁿ)^{1/n}`.
pub fn radius_from_uniform(params: &StaircaseParams, band: Band, u: f64) -> Result<f64> {
    let (a, b) = band.unit_interval(params.gamma);
    if b <= a {
        return Err(Error::DegenerateBand { lo: a * params.delta, hi: b * params.delta });
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(invalid(format!("uniform variate must lie in [0, 1], got {u}")));
    }
    let n = f64::from(params.dim());
    // scaled by bⁿ to keep large k and n finite
    let ratio = (a / b).powf(n);
    let r = params.delta * b * (u * (1.0 - ratio) + ratio).powf(1.0 / n);
    Ok(r.clamp(a * params.delta, b * params.delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn params(eps: f64, delta: f64, gamma: f64, p: f64, n: usize) -> StaircaseParams {
        StaircaseParams::new(eps, delta, gamma, NormSpec::new(p, n).unwrap()).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        let norm = NormSpec::l1(1).unwrap();
        assert!(StaircaseParams::new(0.0, 1.0, 0.5, norm).is_err());
        assert!(StaircaseParams::new(1.0, -1.0, 0.5, norm).is_err());
        assert!(StaircaseParams::new(1.0, 1.0, 1.5, norm).is_err());
        assert!(StaircaseParams::new(1.0, 1.0, -0.1, norm).is_err());
        let ok = params(1.0, 1.0, 0.5, 1.0, 1);
        assert!(BandTable::build(&ok, 0.0).is_err());
        assert!(BandTable::build(&ok, 1.0).is_err());
    }

    /// Weights of the one-dimensional table at ε = ln 2, γ = 1/2 by direct
    /// summation of the proportional forms.
    fn summed_weights_ln2_half() -> Vec<f64> {
        let terms: Vec<f64> = (0..200)
            .flat_map(|k| {
                let x = 0.5f64.powi(k);
                [x * 0.5, x * 0.5 * 0.5]
            })
            .collect();
        let total: f64 = terms.iter().sum();
        terms.iter().map(|t| t / total).collect()
    }

    #[test]
    fn one_dimensional_weights_at_ln2() {
        let oracle = summed_weights_ln2_half();
        let expected = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 12.0];
        for (o, e) in oracle.iter().zip(expected) {
            assert_relative_eq!(*o, e, max_relative = 1e-12);
        }
        let t = BandTable::build(&params(LN_2, 1.0, 0.5, 1.0, 1), 1e-12).unwrap();
        for (w, e) in t.weights().iter().zip(expected) {
            assert_relative_eq!(w.prob, e, max_relative = 1e-10);
        }
    }

    #[test]
    fn empty_bands_at_gamma_endpoints() {
        for n in [1, 3] {
            let one = BandTable::build(&params(1.0, 1.0, 1.0, 1.0, n), 1e-12).unwrap();
            assert!(one.weights().iter().filter(|w| w.band.plateau == Plateau::Lower).all(|w| w.prob == 0.0));
            let zero = BandTable::build(&params(1.0, 1.0, 0.0, 1.0, n), 1e-12).unwrap();
            assert!(zero.weights().iter().filter(|w| w.band.plateau == Plateau::Upper).all(|w| w.prob == 0.0));
        }
    }

    #[test]
    fn gamma_zero_and_one_give_the_same_radial_law() {
        for n in [1, 2, 5] {
            let zero = BandTable::build(&params(0.7, 1.0, 0.0, 2.0, n), 1e-12).unwrap();
            let one = BandTable::build(&params(0.7, 1.0, 1.0, 2.0, n), 1e-12).unwrap();
            for k in 0..=zero.k_max().min(one.k_max()) {
                let m0 = zero.weight(Band::new(k, Plateau::Lower));
                let m1 = one.weight(Band::new(k, Plateau::Upper));
                assert_relative_eq!(m0, m1, max_relative = 1e-12, epsilon = 1e-300);
            }
            for r in [0.0, 0.3, 1.0, 2.5, 7.0] {
                assert_relative_eq!(zero.density_at_radius(r), one.density_at_radius(r), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn density_examples() {
        let t = BandTable::build(&params(LN_2, 1.0, 1.0, 1.0, 1), 1e-12).unwrap();
        assert_relative_eq!(t.normalizer(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(t.density(&[0.5]).unwrap(), 0.25, max_relative = 1e-14);
        // 1-D normalisation by midpoint integration over [-60, 60]
        let h = 1e-3;
        let integral: f64 = (0..120_000)
            .map(|i| t.density(&[-60.0 + (i as f64 + 0.5) * h]).unwrap() * h)
            .sum();
        assert_relative_eq!(integral, 1.0, max_relative = 1e-9);

        let s = BandTable::build(&params(1.3, 2.0, 0.4, 2.0, 3), 1e-12).unwrap();
        assert_relative_eq!(s.density(&[0.0, 0.0, 0.0]).unwrap(), s.normalizer(), max_relative = 1e-15);
        // breakpoint (k+γ)Δ belongs to the lower plateau
        let k = 2.0;
        let r = (k + 0.4) * 2.0;
        assert_relative_eq!(
            s.density(&[r, 0.0, 0.0]).unwrap(),
            s.normalizer() * (-(k + 1.0) * 1.3).exp(),
            max_relative = 1e-14
        );
        assert!(s.density(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn truncation_respects_tolerance() {
        for (eps, n, gamma) in [(0.5, 15, 0.3), (15.0, 1, 0.5), (1.0, 3, 0.0), (4.0, 2, 1.0)] {
            let t = BandTable::build(&params(eps, 1.0, gamma, 1.0, n), 1e-12).unwrap();
            assert!(t.tail_mass() < 1e-12, "tail {} at eps={eps} n={n}", t.tail_mass());
            let total: f64 = t.weights().iter().map(|w| w.prob).sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
            assert!(t.weights().iter().all(|w| w.prob >= 0.0));
        }
    }

    #[test]
    fn radius_inversion() {
        let p = params(1.0, 1.0, 0.5, 2.0, 2);
        let band = Band::new(1, Plateau::Upper);
        assert_eq!(radius_from_uniform(&p, band, 0.0).unwrap(), 1.0);
        assert_eq!(radius_from_uniform(&p, band, 1.0).unwrap(), 1.5);
        let q = params(1.0, 1.0, 1.0, 2.0, 2);
        let r = radius_from_uniform(&q, Band::new(1, Plateau::Upper), 0.5).unwrap();
        assert_relative_eq!(r, 2.5f64.sqrt(), max_relative = 1e-15);
        // numeric inversion of the conditional CDF (r² - 1)/3 = 0.5 by bisection
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (mid * mid - 1.0) / 3.0 < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(r, lo, max_relative = 1e-14);
        assert!(matches!(
            radius_from_uniform(&q, Band::new(0, Plateau::Lower), 0.5),
            Err(Error::DegenerateBand { .. })
        ));
    }

    #[test]
    fn radius_is_monotone_in_uniform() {
        let p = params(0.5, 1.5, 0.3, 1.0, 7);
        for band in [Band::new(0, Plateau::Upper), Band::new(4, Plateau::Lower)] {
            let mut prev = -1.0;
            for i in 0..=1000 {
                let r = radius_from_uniform(&p, band, i as f64 / 1000.0).unwrap();
                assert!(r > prev || (i == 0));
                prev = r;
            }
        }
    }

    #[test]
    fn radial_cdf_is_consistent_with_band_masses() {
        let t = BandTable::build(&params(1.0, 1.0, 0.5, 1.0, 3), 1e-12).unwrap();
        let mut acc = 0.0;
        for w in t.weights().iter().take(10) {
            acc += t.band_mass(w.band);
            let (_, b) = w.band.unit_interval(0.5);
            assert_relative_eq!(t.radial_cdf(b), acc, max_relative = 1e-12);
        }
        assert!((t.radial_cdf(1e6) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sharded_sampling_is_reproducible() {
        let t = BandTable::build(&params(1.0, 1.0, 0.5, 2.0, 3), 1e-12).unwrap();
        let a = t.sample_sharded(9, "draws", 70_000);
        let b = t.sample_sharded(9, "draws", 70_000);
        assert_eq!(a, b);
        assert_eq!(a.len(), 70_000);
        assert!(t.sample(&mut substream(1, "x", 0), 0).is_empty());
    }

    #[test]
    fn one_dimensional_gamma_one_shells_are_geometric() {
        let eps = 0.8;
        let t = BandTable::build(&params(eps, 1.0, 1.0, 1.0, 1), 1e-12).unwrap();
        let n = 200_000;
        let draws = t.sample_radii(&mut substream(3, "shells", 0), n);
        let mut counts = [0usize; 6];
        for (_, r) in draws {
            let s = r.floor() as usize;
            if s < counts.len() {
                counts[s] += 1;
            }
        }
        let x = (-eps).exp();
        for (k, &c) in counts.iter().enumerate() {
            let p = (1.0 - x) * x.powi(k as i32);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 4.0 * se, "shell {k}");
        }
    }
}
