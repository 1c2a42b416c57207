//! Choosing γ, Laplace baselines and utility–privacy sweeps.
//!
//! `J(γ)` is evaluated with the exact series on a uniform grid and refined
//! by golden-section search inside the grid cells next to the grid minimum.
//! `J` is not known to be unimodal, so the result is certified only against
//! the grid: the returned cost is never above any grid value.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::cost::{expected_cost_mc_sharded, expected_cost_series, CostSpec};
use crate::error::{Error, Result};
use crate::norms::NormSpec;
use crate::rng;
use crate::staircase::{BandTable, StaircaseParams, DEFAULT_TAIL_TOL};

pub const DEFAULT_GRID_POINTS: usize = 101;
pub const DEFAULT_REFINE_ITERS: usize = 100;
/// Golden-section search stops once the bracket is narrower than this.
pub const REFINE_WIDTH: f64 = 1e-6;
/// Tolerance on the series tail when evaluating `J(γ)`.
pub const SERIES_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaStar {
    pub gamma_star: f64,
    pub cost: f64,
}

/// `J(γ) = E_{f_γ}[φ(‖X‖)]`.
pub fn staircase_cost(eps: f64, delta: f64, gamma: f64, norm: NormSpec, cost: &CostSpec) -> Result<f64> {
    let params = StaircaseParams::new(eps, delta, gamma, norm)?;
    let table = BandTable::build(&params, DEFAULT_TAIL_TOL)?;
    expected_cost_series(&table, cost, SERIES_TOL)
}

pub fn find_gamma_star(
    eps: f64,
    delta: f64,
    norm: NormSpec,
    cost: &CostSpec,
    grid_points: usize,
    refine_iters: usize,
) -> Result<GammaStar> {
    if grid_points < 3 {
        return Err(crate::error::invalid(format!("need at least 3 grid points, got {grid_points}")));
    }
    let j = |g: f64| staircase_cost(eps, delta, g, norm, cost);
    let last = (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| i as f64 / last).collect();
    let values = grid.par_iter().map(|&g| j(g)).collect::<Result<Vec<f64>>>()?;
    let best = (0..grid_points).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    let mut answer = GammaStar { gamma_star: grid[best], cost: values[best] };

    // golden section on the bracketing cells [γ_{i-1}, γ_{i+1}]
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid_points - 1)]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (j(c)?, j(d)?);
    for _ in 0..refine_iters {
        if b - a < REFINE_WIDTH {
            break;
        }
        if fc <= fd {
            (b, d, fd) = (d, c, fc);
            c = b - ratio * (b - a);
            fc = j(c)?;
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + ratio * (b - a);
            fd = j(d)?;
        }
    }
    for (g, v) in [(c, fc), (d, fd)] {
        if v < answer.cost {
            answer = GammaStar { gamma_star: g, cost: v };
        }
    }
    Ok(answer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceFlavor {
    /// iid Laplace(Δ/ε) coordinates; ε-DP for the ℓ1 norm only.
    ProductL1,
    /// Density ∝ `e^{-ε‖x‖/Δ}` in the given norm.
    Radial,
}

/// Expected cost of the Laplace comparator. In both flavors `‖X‖` is
/// `Gamma(n, Δ/ε)`: for the product flavor `‖X‖₁` is a sum of `n`
/// exponentials, and the radial flavor has radial density ∝ `r^{n-1}e^{-εr/Δ}`.
pub fn laplace_baseline_cost(
    eps: f64,
    delta: f64,
    norm: &NormSpec,
    flavor: LaplaceFlavor,
    cost: &CostSpec,
) -> Result<f64> {
    if flavor == LaplaceFlavor::ProductL1 && norm.p() != 1.0 {
        return Err(Error::FlavorMismatch(format!(
            "product Laplace is only matched to the l1 norm, got p = {}",
            norm.p()
        )));
    }
    if !(eps > 0.0 && delta > 0.0) {
        return Err(crate::error::invalid("eps and delta must be positive"));
    }
    let n = norm.dim() as f64;
    let theta = delta / eps;
    Ok(match *cost {
        CostSpec::Power { q } => (ln_gamma(n + q) - ln_gamma(n) + q * theta.ln()).exp(),
        CostSpec::Threshold { lambda } => {
            if lambda == 0.0 {
                1.0
            } else {
                gamma_ur(n, lambda / theta)
            }
        }
        CostSpec::Truncated { cap } => {
            if cap == 0.0 {
                0.0
            } else {
                n * theta * gamma_lr(n + 1.0, cap / theta) + cap * gamma_ur(n, cap / theta)
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub eps: f64,
    pub dim: usize,
    pub p: f64,
    pub gamma_star: f64,
    pub staircase_cost: f64,
    pub laplace_cost: f64,
    pub cost_kind: &'static str,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    /// `|mc_mean - staircase_cost| ≤ 3·mc_stderr`.
    pub mc_consistent: Option<bool>,
}

#[derive(Debug, Clone, Copy)]
pub struct McCheck {
    pub samples: usize,
    pub seed: u64,
}

/// One row per `(ε, n)`, sorted by `(ε, n)`. The Laplace column uses the
/// product flavor for ℓ1 and the radial flavor otherwise.
pub fn tradeoff_sweep(
    eps_list: &[f64],
    dim_list: &[usize],
    p: f64,
    delta: f64,
    cost: &CostSpec,
    mc: Option<McCheck>,
) -> Result<Vec<TradeoffRow>> {
    if eps_list.is_empty() || dim_list.is_empty() {
        return Err(crate::error::invalid("sweep needs at least one eps and one dimension"));
    }
    let cells: Vec<(f64, usize)> =
        eps_list.iter().flat_map(|&e| dim_list.iter().map(move |&n| (e, n))).collect();
    let mut rows = rng::with_pool(|| {
        cells
            .par_iter()
            .map(|&(eps, dim)| sweep_row(eps, dim, p, delta, cost, mc))
            .collect::<Result<Vec<TradeoffRow>>>()
    })?;
    rows.sort_by(|a, b| a.eps.total_cmp(&b.eps).then(a.dim.cmp(&b.dim)));
    Ok(rows)
}

fn sweep_row(eps: f64, dim: usize, p: f64, delta: f64, cost: &CostSpec, mc: Option<McCheck>) -> Result<TradeoffRow> {
    let norm = NormSpec::new(p, dim)?;
    let star = find_gamma_star(eps, delta, norm, cost, DEFAULT_GRID_POINTS, DEFAULT_REFINE_ITERS)?;
    let flavor = if p == 1.0 { LaplaceFlavor::ProductL1 } else { LaplaceFlavor::Radial };
    let laplace_cost = laplace_baseline_cost(eps, delta, &norm, flavor, cost)?;
    let (mut mc_mean, mut mc_stderr, mut mc_consistent) = (None, None, None);
    if let Some(check) = mc {
        let table = BandTable::build(&StaircaseParams::new(eps, delta, star.gamma_star, norm)?, DEFAULT_TAIL_TOL)?;
        let tag = format!("sweep/{eps}/{dim}");
        let est = expected_cost_mc_sharded(&table, cost, check.seed, &tag, check.samples)?;
        mc_mean = Some(est.mean);
        mc_stderr = Some(est.stderr);
        mc_consistent = Some((est.mean - star.cost).abs() <= 3.0 * est.stderr);
    }
    Ok(TradeoffRow {
        eps,
        dim,
        p,
        gamma_star: star.gamma_star,
        staircase_cost: star.cost,
        laplace_cost,
        cost_kind: cost.kind(),
        mc_mean,
        mc_stderr,
        mc_consistent,
    })
}
