//! Rearrangements and the maximal-decay class, at desk scale.
//!
//! - [`GridSet`]: finite unions of half-open intervals on the line, with
//!   exact measure, intersection, difference and Minkowski sum, plus the
//!   centered rearrangement `A*`.
//! - [`rearrange_profile`]: the nonincreasing equimeasurable version of a
//!   radial step profile.
//! - [`make_rho_y`] and [`find_mass_matching_y`]: the maximal-decay
//!   modification anchored at `[y, y + Δ)` and the `y` that preserves mass.
//! - [`check_domination`]: first-order stochastic dominance of radial laws.
//! - [`decompose_staircase_mixture`]: weights of staircase laws that
//!   reproduce a maximal-decay profile.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dpverify::{check_maximal_decay, check_radial_loglip};
use crate::error::{invalid, Error, Result};
use crate::nnls::nnls;
use crate::norms::NormSpec;
use crate::profile::{Cell, ProfileTail, RadialProfile};
use crate::series::ln_power_gap;
use crate::staircase::{BandTable, StaircaseParams};

/// Sorted, disjoint, non-adjacent half-open intervals `[a, b)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GridSet {
    intervals: Vec<(f64, f64)>,
}

impl GridSet {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(invalid("intervals must be finite with a ≤ b"));
        }
        Ok(Self::normalized(intervals))
    }

    pub fn empty() -> Self {
        Self::default()
    }

    fn normalized(mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.retain(|&(a, b)| b > a);
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::normalized(self.intervals.iter().chain(&other.intervals).copied().collect())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a, b) = self.intervals[i];
            let (c, d) = other.intervals[j];
            let (lo, hi) = (a.max(c), b.min(d));
            if lo < hi {
                out.push((lo, hi));
            }
            if b < d {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::normalized(out)
    }

    /// `self ∩ otherᶜ`.
    pub fn difference(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            let mut start = a;
            for &(c, d) in other.intervals.iter().filter(|&&(c, d)| d > a && c < b) {
                if c > start {
                    out.push((start, c));
                }
                start = start.max(d);
            }
            if start < b {
                out.push((start, b));
            }
        }
        Self::normalized(out)
    }

    /// `{x + y : x ∈ self, y ∈ other}`; `[a, b) + [c, d) = [a + c, b + d)`.
    pub fn minkowski_sum(&self, other: &Self) -> Self {
        let sums = self
            .intervals
            .iter()
            .flat_map(|&(a, b)| other.intervals.iter().map(move |&(c, d)| (a + c, b + d)))
            .collect();
        Self::normalized(sums)
    }
}

/// The centered interval `[-|A|/2, |A|/2)` with the measure of `A`.
pub fn rearrange_set(set: &GridSet) -> GridSet {
    let half = 0.5 * set.measure();
    GridSet::normalized(vec![(-half, half)])
}

/// Radius of the centered ball with volume `volume`.
pub fn rearranged_radius(volume: f64, norm: &NormSpec) -> f64 {
    if volume <= 0.0 {
        return 0.0;
    }
    ((volume.ln() - norm.ln_unit_ball_volume()) / norm.dim() as f64).exp()
}

/// Sorts `(volume, value)` pieces by decreasing value and lays them out as
/// consecutive shells starting at `start`, returning the shell cells.
fn layout_sorted(start: f64, mut pieces: Vec<(f64, f64)>, n: u32) -> Vec<Cell> {
    pieces.sort_by(|x, y| y.1.total_cmp(&x.1));
    let nf = f64::from(n);
    let mut acc = start.powf(nf);
    let mut cells: Vec<Cell> = Vec::new();
    let mut r = start;
    for (vol, value) in pieces {
        acc += vol;
        let end = acc.powf(1.0 / nf);
        match cells.last_mut() {
            Some(last) if last.value == value => last.end = end,
            _ => cells.push(Cell { start: r, end, value }),
        }
        r = end;
    }
    cells
}

/// The nonincreasing rearrangement of the radial profile `ρ(‖x‖)`: plateaus
/// sorted by value and laid out so each keeps its volume.
///
/// With a decay tail, the tail's last period must itself be nonincreasing;
/// sorting then stops at the first whole period beyond which the tail lies
/// below everything before it, and the tail is kept.
pub fn rearrange_profile(profile: &RadialProfile, norm: &NormSpec) -> Result<RadialProfile> {
    let n = norm.dim() as u32;
    let volume = |c: &Cell| ln_power_gap(c.start, c.end, n).exp();
    match profile.tail() {
        ProfileTail::Zero => {
            let pieces: Vec<(f64, f64)> =
                profile.cells().iter().filter(|c| c.value > 0.0).map(|c| (volume(c), c.value)).collect();
            if pieces.is_empty() {
                return Ok(profile.clone());
            }
            build_profile(layout_sorted(0.0, pieces, n), ProfileTail::Zero)
        }
        ProfileTail::MaximalDecay { eps, delta } => {
            let end = profile.window_end();
            let last: Vec<Cell> =
                profile.cells_until(end + delta).into_iter().filter(|c| 0.5 * (c.start + c.end) >= end).collect();
            if last.windows(2).any(|w| w[1].value > w[0].value) {
                return Err(Error::NotMonotone("decay tail replays a non-monotone period".into()));
            }
            let tail_max = last.first().map_or(0.0, |c| c.value);
            for j in 0..100_000u32 {
                let cut = end + f64::from(j) * delta;
                let prefix = profile.cells_until(cut);
                let prefix: Vec<&Cell> = prefix.iter().filter(|c| 0.5 * (c.start + c.end) < cut).collect();
                let prefix_min = prefix.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
                let beyond_max = tail_max * (-eps * f64::from(j)).exp();
                if prefix_min == 0.0 {
                    return Err(Error::NotMonotone("zero plateau before a positive decay tail".into()));
                }
                if beyond_max <= prefix_min {
                    let pieces = prefix.iter().map(|c| (volume(c), c.value)).collect();
                    let mut cells = layout_sorted(0.0, pieces, n);
                    cells.last_mut().expect("nonempty prefix").end = cut;
                    // the untouched period after the cut seeds the decay tail
                    cells.extend(profile.cells_until(cut + delta).into_iter().filter(|c| {
                        let mid = 0.5 * (c.start + c.end);
                        mid >= cut && mid < cut + delta
                    }));
                    return build_profile(cells, profile.tail());
                }
            }
            Err(Error::NotMonotone("decay tail never drops below the window".into()))
        }
    }
}

fn build_profile(cells: Vec<Cell>, tail: ProfileTail) -> Result<RadialProfile> {
    let mut breaks = vec![0.0];
    let mut values = Vec::with_capacity(cells.len());
    for c in cells {
        if c.end <= *breaks.last().expect("nonempty") {
            continue;
        }
        breaks.push(c.end);
        values.push(c.value);
    }
    RadialProfile::new(breaks, values, tail)
}

/// `ρ_y(r) = e^{-εj} ρ(r - jΔ)` with `j = ⌊(r - y)/Δ⌋`: agrees with `ρ` on
/// `[y, y + Δ)` and decays maximally in both directions from there.
///
/// The result is stored as one period `[0, Δ)` plus a decay tail.
pub fn make_rho_y(rho: &RadialProfile, y: f64, eps: f64, delta: f64) -> Result<RadialProfile> {
    if !(y >= 0.0 && y.is_finite()) {
        return Err(invalid(format!("anchor y must be nonnegative, got {y}")));
    }
    if !rho.is_nonincreasing() {
        return Err(Error::NotMonotone("rho must be nonincreasing".into()));
    }
    if !check_radial_loglip(rho, eps, delta) {
        return Err(Error::Precondition("rho violates the eps-per-delta log-Lipschitz bound".into()));
    }
    let q = (y / delta).floor();
    let s = y - q * delta;
    let source = rho.cells_until(y + 2.0 * delta);
    let mut cells: Vec<Cell> = Vec::new();
    // [0, s) comes from [(q+1)Δ, (q+1)Δ + s) lifted by e^{ε(q+1)};
    // [s, Δ) comes from [qΔ + s, (q+1)Δ) lifted by e^{εq}.
    for (lo, hi, shift, lift) in [
        ((q + 1.0) * delta, (q + 1.0) * delta + s, (q + 1.0) * delta, ((q + 1.0) * eps).exp()),
        (y, (q + 1.0) * delta, q * delta, (q * eps).exp()),
    ] {
        for c in source.iter().filter(|c| c.end > lo && c.start < hi) {
            let start = c.start.max(lo) - shift;
            let end = c.end.min(hi) - shift;
            if end > start {
                cells.push(Cell { start, end, value: c.value * lift });
            }
        }
    }
    if let Some(last) = cells.last_mut() {
        last.end = delta;
    }
    if let Some(first) = cells.first_mut() {
        first.start = 0.0;
    }
    build_profile(cells, ProfileTail::MaximalDecay { eps, delta })
}

/// `ψ = ∫₀^∞ r^{n-1} ρ_y(r) dr`.
pub fn psi(rho_y: &RadialProfile, n: u32) -> f64 {
    rho_y.moment(n)
}

/// Finds `y` with `ψ(y)` equal to `∫ r^{n-1} ρ` within relative `tol` by
/// doubling `m` until `ψ(mΔ)` reaches the target, then bisecting.
pub fn find_mass_matching_y(
    rho: &RadialProfile,
    norm: &NormSpec,
    eps: f64,
    delta: f64,
    tol: f64,
) -> Result<(f64, RadialProfile)> {
    if check_maximal_decay(rho, eps, delta, 1e-12) {
        return Ok((0.0, rho.clone()));
    }
    let n = norm.dim() as u32;
    let target = rho.moment(n);
    let psi_at = |y: f64| -> Result<(f64, RadialProfile)> {
        let p = make_rho_y(rho, y, eps, delta)?;
        Ok((psi(&p, n), p))
    };
    let (psi0, p0) = psi_at(0.0)?;
    if (psi0 - target).abs() <= tol * target {
        return Ok((0.0, p0));
    }
    if psi0 > target {
        return Err(Error::Precondition(format!("psi(0) = {psi0} already exceeds the target {target}")));
    }
    let mut hi = delta;
    loop {
        let (v, p) = psi_at(hi)?;
        if (v - target).abs() <= tol * target {
            return Ok((hi, p));
        }
        if v > target {
            break;
        }
        hi *= 2.0;
        if hi > delta * 2f64.powi(50) {
            return Err(Error::Divergence("psi never reaches the target mass".into()));
        }
    }
    let mut lo = if hi > delta { 0.5 * hi } else { 0.0 };
    loop {
        let mid = 0.5 * (lo + hi);
        let (v, p) = psi_at(mid)?;
        if (v - target).abs() <= tol * target || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok((mid, p));
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// A radial CDF `r ↦ Pr(‖X‖ ≤ r)` that is smooth between known breakpoints.
pub trait RadialCdf {
    fn cdf(&self, r: f64) -> f64;
    fn breakpoints(&self, r_max: f64) -> Vec<f64>;
    /// A radius beyond which both tails are negligible.
    fn effective_radius(&self) -> f64;
}

/// The law with density `ρ(‖x‖)` (normalised on construction).
#[derive(Debug, Clone)]
pub struct ProfileLaw {
    profile: RadialProfile,
    norm: NormSpec,
}

impl ProfileLaw {
    pub fn new(profile: &RadialProfile, norm: NormSpec) -> Result<Self> {
        Ok(Self { profile: profile.normalized(&norm)?, norm })
    }

    pub fn mean(&self) -> f64 {
        self.profile.mean_radius(&self.norm)
    }
}

impl RadialCdf for ProfileLaw {
    fn cdf(&self, r: f64) -> f64 {
        self.profile.radial_cdf(&self.norm, r)
    }

    fn breakpoints(&self, r_max: f64) -> Vec<f64> {
        let mut b: Vec<f64> = self.profile.cells_until(r_max).iter().map(|c| c.end).collect();
        b.retain(|&x| x <= r_max);
        b
    }

    fn effective_radius(&self) -> f64 {
        let mut r = self.profile.window_end();
        while matches!(self.profile.tail(), ProfileTail::MaximalDecay { .. }) && self.cdf(r) < 1.0 - 1e-13 && r < 1e9 {
            r *= 1.5;
        }
        r
    }
}

impl RadialCdf for BandTable {
    fn cdf(&self, r: f64) -> f64 {
        self.radial_cdf(r)
    }

    fn breakpoints(&self, r_max: f64) -> Vec<f64> {
        crate::dpverify::RadialDensity::breakpoints(self, r_max)
    }

    fn effective_radius(&self) -> f64 {
        (self.k_max() + 1) as f64 * self.params().delta
    }
}

/// True iff `F(λ) ≥ G(λ) - tol` at every breakpoint of either law, i.e. the
/// `G`-variable stochastically dominates the `F`-variable. Between
/// breakpoints `F - G` is monotone in `rⁿ`, so the breakpoints decide it.
pub fn check_domination(f: &dyn RadialCdf, g: &dyn RadialCdf, tol: f64) -> Result<bool> {
    let r_max = f.effective_radius().max(g.effective_radius());
    let mut grid = f.breakpoints(r_max);
    grid.extend(g.breakpoints(r_max));
    grid.push(r_max);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let (mut pf, mut pg) = (0.0, 0.0);
    for &r in &grid {
        let (vf, vg) = (f.cdf(r), g.cdf(r));
        if vf < pf - tol || vg < pg - tol {
            return Err(Error::NotMonotone(format!("CDF decreases at r = {r}")));
        }
        (pf, pg) = (vf, vg);
        if vf < vg - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureWeight {
    pub gamma: f64,
    pub weight: f64,
}

/// Writes a maximal-decay profile as a mixture of normalised staircase
/// profiles at `γ = m/G`, `m = 1..=G`, by row-weighted NNLS on the plateaus
/// of `[0, Δ)` (refined by the profile's own breaks, so off-grid breaks show
/// up in the residual).
pub fn decompose_staircase_mixture(
    rho: &RadialProfile,
    norm: &NormSpec,
    gamma_grid: usize,
) -> Result<Vec<MixtureWeight>> {
    let ProfileTail::MaximalDecay { eps, delta } = rho.tail() else {
        return Err(Error::Precondition("profile has no decay tail".into()));
    };
    if gamma_grid == 0 {
        return Err(invalid("gamma grid needs at least one point"));
    }
    if !check_maximal_decay(rho, eps, delta, 1e-9) {
        return Err(Error::Precondition("profile is not in the maximal-decay class".into()));
    }
    let mass = rho.radial_mass(norm);
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("profile integrates to {mass}, not 1")));
    }
    let g = gamma_grid as f64;
    let mut cuts: Vec<f64> = (0..=gamma_grid).map(|j| j as f64 / g * delta).collect();
    cuts.extend(rho.breaks().iter().copied().filter(|&b| b > 0.0 && b < delta));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * delta);
    let mids: Vec<f64> = cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let target: Vec<f64> = mids.iter().map(|&t| rho.value_at(t)).collect();
    if target.iter().any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::Precondition("profile vanishes inside the first period".into()));
    }

    let mut columns = Vec::with_capacity(gamma_grid);
    for m in 1..=gamma_grid {
        let params = StaircaseParams::new(eps, delta, m as f64 / g, *norm)?;
        let table = BandTable::build(&params, 1e-12)?;
        let s = RadialProfile::staircase(&table);
        columns.push(mids.iter().map(|&t| s.value_at(t)).collect::<Vec<f64>>());
    }
    let rows = mids.len();
    let a = DMatrix::from_fn(rows, gamma_grid, |i, j| columns[j][i] / target[i]);
    let b = DVector::from_element(rows, 1.0);
    let w = nnls(&a, &b)?;
    let fit = &a * &w;
    let residual = fit.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    if residual > 1e-8 {
        return Err(Error::DecompositionFailure { residual });
    }
    Ok((1..=gamma_grid)
        .map(|m| MixtureWeight { gamma: m as f64 / g, weight: w[m - 1] })
        .collect())
}

/// A random radial profile on `[0, periods·Δ)` with `cells_per_period`
/// equal cells per period and a maximal-decay tail. The window wanders up
/// and down, the last period is nonincreasing, and the log-Lipschitz bound
/// holds, so the profile is a valid ε-DP radial density that is generally
/// not monotone.
pub fn random_dp_profile<R: rand::Rng + ?Sized>(
    rng: &mut R,
    eps: f64,
    delta: f64,
    periods: usize,
    cells_per_period: usize,
) -> Result<RadialProfile> {
    if periods == 0 || cells_per_period == 0 {
        return Err(invalid("need at least one period and one cell per period"));
    }
    let g = cells_per_period as f64;
    let total = periods * cells_per_period;
    let breaks: Vec<f64> = (0..=total).map(|i| i as f64 * delta / g).collect();
    let mut step = 0.9 * eps;
    loop {
        let mut ln_v = 0.0;
        let mut values = Vec::with_capacity(total);
        for i in 0..total {
            if i > 0 {
                ln_v += if i >= total - cells_per_period {
                    -rng.random::<f64>() * eps / g
                } else {
                    (2.0 * rng.random::<f64>() - 1.0) * step
                };
            }
            values.push(ln_v.exp());
        }
        let profile = RadialProfile::new(breaks.clone(), values, ProfileTail::MaximalDecay { eps, delta })?;
        if check_radial_loglip(&profile, eps, delta) {
            return Ok(profile);
        }
        step *= 0.8;
    }
}
