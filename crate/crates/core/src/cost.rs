//! Norm-monotone costs `Φ(x) = φ(‖x‖)` and their expectations under a
//! staircase law.
//!
//! The series evaluator walks periods `k = 0, 1, …` and adds the two band
//! contributions `w_{k,i} E[φ(R) | band]`. Power costs use the closed-form
//! band moment; other costs integrate each band with adaptive Simpson,
//! split at the cost's kinks. Summation stops once the contributions decay
//! geometrically and the implied tail is below the tolerance.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, shard_layout};
use crate::series::{ln_power_gap, ln_real_power_gap};
use crate::staircase::{Band, BandTable, Plateau};

/// Periods examined before the series is declared divergent.
const MAX_PERIODS: u64 = 5_000_000;

/// Consecutive growing period contributions that trigger the growth test.
const GROWTH_WINDOW: usize = 8;

const SIMPSON_MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    /// `φ(r) = r^q`.
    Power { q: f64 },
    /// `φ(r) = 1{r ≥ λ}`.
    Threshold { lambda: f64 },
    /// `φ(r) = min(r, T)`.
    Truncated { cap: f64 },
}

impl CostSpec {
    pub fn power(q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(invalid(format!("power exponent q must be positive and finite, got {q}")));
        }
        Ok(Self::Power { q })
    }

    /// `λ = 0` is admitted and gives the constant cost 1.
    pub fn threshold(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("threshold lambda must be nonnegative and finite, got {lambda}")));
        }
        Ok(Self::Threshold { lambda })
    }

    pub fn truncated(cap: f64) -> Result<Self> {
        if !(cap >= 0.0 && cap.is_finite()) {
            return Err(invalid(format!("truncation cap must be nonnegative and finite, got {cap}")));
        }
        Ok(Self::Truncated { cap })
    }

    pub fn phi(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match *self {
            Self::Power { q } => r.powf(q),
            Self::Threshold { lambda } => {
                if r >= lambda {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Truncated { cap } => r.min(cap),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Power { .. } => "power",
            Self::Threshold { .. } => "threshold",
            Self::Truncated { .. } => "truncated",
        }
    }

    /// Radii where `φ` is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            Self::Power { .. } => vec![],
            Self::Threshold { lambda } => vec![lambda],
            Self::Truncated { cap } => vec![cap],
        }
    }
}

/// `E[R^q | R ∈ [aΔ, bΔ]] / Δ^q = (n/(n+q)) (b^{n+q} - a^{n+q}) / (bⁿ - aⁿ)`.
pub fn band_conditional_moment(a: f64, b: f64, n: u32, q: f64) -> Result<f64> {
    Ok(ln_band_conditional_moment(a, b, n, q)?.exp())
}

fn ln_band_conditional_moment(a: f64, b: f64, n: u32, q: f64) -> Result<f64> {
    if !(a >= 0.0 && b.is_finite()) {
        return Err(invalid(format!("band endpoints must satisfy 0 ≤ a ≤ b, got [{a}, {b}]")));
    }
    if b <= a {
        return Err(Error::DegenerateBand { lo: a, hi: b });
    }
    let nf = f64::from(n);
    Ok((nf / (nf + q)).ln() + ln_real_power_gap(a, b, nf + q) - ln_power_gap(a, b, n))
}

/// `E[φ(‖X‖)]` for the staircase law of `table`, with series tail below `tol`.
pub fn expected_cost_series(table: &BandTable, cost: &CostSpec, tol: f64) -> Result<f64> {
    match *cost {
        CostSpec::Power { q } => {
            let p = table.params();
            let (n, gamma, ln_delta_q) = (p.dim(), p.gamma, q * p.delta.ln());
            sum_periods(table, tol, &[], |band| {
                let (a, b) = band.unit_interval(gamma);
                if b <= a {
                    return Ok(0.0);
                }
                let ln_mass = table.band_mass(band).ln();
                Ok((ln_mass + ln_delta_q + ln_band_conditional_moment(a, b, n, q)?).exp())
            })
        }
        _ => expected_cost_quadrature(table, |r| cost.phi(r), &cost.kinks(), tol),
    }
}

/// Series evaluation for an arbitrary nondecreasing `φ`, integrating each
/// band numerically. `kinks` are radii where `φ` is not smooth.
pub fn expected_cost_quadrature(
    table: &BandTable,
    phi: impl Fn(f64) -> f64,
    kinks: &[f64],
    tol: f64,
) -> Result<f64> {
    let p = table.params();
    let (n, gamma, delta) = (p.dim(), p.gamma, p.delta);
    let bands = 2.0 * (table.k_max() + 1) as f64;
    let unit_kinks: Vec<f64> = kinks.iter().map(|k| k / delta).collect();
    sum_periods(table, tol, kinks, |band| {
        let (a, b) = band.unit_interval(gamma);
        if b <= a {
            return Ok(0.0);
        }
        let mass = table.band_mass(band);
        if mass == 0.0 {
            return Ok(0.0);
        }
        // conditional radial density in units of Δ, scaled by bⁿ
        let nf = f64::from(n);
        let denom = b * -(nf * (a / b).ln()).exp_m1();
        let weight = |s: f64| nf * (s / b).powi(n as i32 - 1) / denom;
        let integrand = |s: f64| phi(delta * s) * weight(s);
        let band_tol = tol / (bands * mass);
        let mut cuts = vec![a];
        cuts.extend(unit_kinks.iter().copied().filter(|&k| k > a && k < b));
        cuts.push(b);
        let conditional: f64 = cuts
            .windows(2)
            .map(|w| adaptive_simpson(&integrand, w[0], w[1], band_tol / (cuts.len() - 1) as f64))
            .sum();
        Ok(mass * conditional)
    })
}

/// Sums period contributions until the geometric tail bound drops below
/// `tol`, or fails if contributions stop decaying.
fn sum_periods(
    table: &BandTable,
    tol: f64,
    kinks: &[f64],
    band_term: impl Fn(Band) -> Result<f64>,
) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid(format!("series tolerance must be positive, got {tol}")));
    }
    let p = table.params();
    let last_kink = kinks.iter().copied().fold(0.0, f64::max) / p.delta;
    let mut total = 0.0;
    let mut prev = 0.0;
    let mut rising: Vec<(f64, f64)> = Vec::new();
    for k in 0..MAX_PERIODS {
        let c = band_term(Band::new(k, Plateau::Upper))? + band_term(Band::new(k, Plateau::Lower))?;
        total += c;
        if !total.is_finite() || !c.is_finite() {
            return Err(Error::Divergence(format!("expected cost is not finite (period {k})")));
        }
        if k > 0 && prev > 0.0 && c > 0.0 {
            let r = c / prev;
            if r < 1.0 {
                rising.clear();
                if c * r / (1.0 - r) < tol {
                    return Ok(total);
                }
            } else if k >= 2 {
                rising.push((k as f64, r.ln()));
                if rising.len() >= GROWTH_WINDOW {
                    check_growth(&rising, p.eps)?;
                }
            }
        } else if c == 0.0 && k as f64 > last_kink + 1.0 {
            let mass = table.band_mass(Band::new(k, Plateau::Upper))
                + table.band_mass(Band::new(k, Plateau::Lower));
            if mass == 0.0 {
                return Ok(total);
            }
        }
        prev = c;
    }
    Err(Error::Divergence(format!("expected cost series did not settle within {MAX_PERIODS} periods")))
}

/// Fits `ln r_k ≈ α ln((k + c)/(k - 1 + c)) + β` through the ends of the
/// current run of growing period contributions `(k, ln r_k)`, for `c = 0`
/// and `c = 1`. Polynomial growth of `φ` gives `β ≈ -ε` for any `c` in
/// between, so only `β ≥ 0` under both fits counts as persistent growth.
fn check_growth(rising: &[(f64, f64)], eps: f64) -> Result<()> {
    let ((k1, l1), (k2, l2)) = (rising[0], rising[rising.len() - 1]);
    let beta = |c: f64| {
        let x = |k: f64| ((k + c) / (k - 1.0 + c)).ln();
        let alpha = (l1 - l2) / (x(k1) - x(k2));
        l2 - alpha * x(k2)
    };
    let beta = beta(0.0).min(beta(1.0));
    if beta >= 0.0 {
        return Err(Error::Divergence(format!(
            "cost grows faster than the e^(-eps) decay: contributions rise by a factor near {:.4} per period (growth of phi at least e^{:.4} per delta)",
            beta.exp(),
            beta + eps
        )));
    }
    Ok(())
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Sample mean and standard error (`s/√N` with the `N - 1` variance).
pub fn mean_and_stderr(values: &[f64]) -> Result<McEstimate> {
    let n = values.len();
    if n < 2 {
        return Err(invalid(format!("need at least two samples, got {n}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Ok(McEstimate { mean, stderr: (var / n as f64).sqrt(), samples: n })
}

/// Monte Carlo estimate of `E[φ(‖X‖)]` from `count` sampler draws.
pub fn expected_cost_mc<R: Rng + ?Sized>(
    table: &BandTable,
    cost: &CostSpec,
    rng: &mut R,
    count: usize,
) -> Result<McEstimate> {
    let norm = table.params().norm;
    let mut x = vec![0.0; norm.dim()];
    let values: Vec<f64> = (0..count)
        .map(|_| {
            table.sample_into(rng, &mut x);
            cost.phi(norm.norm_unchecked(&x))
        })
        .collect();
    mean_and_stderr(&values)
}

/// Sharded variant: draws come from [`BandTable::sample_sharded`]'s
/// substreams, so the estimate matches a cost evaluation of those exact
/// draws regardless of thread count.
pub fn expected_cost_mc_sharded(
    table: &BandTable,
    cost: &CostSpec,
    seed: u64,
    tag: &str,
    count: usize,
) -> Result<McEstimate> {
    let norm = table.params().norm;
    let shards: Vec<Vec<f64>> = rng::with_pool(|| {
        shard_layout(count)
            .into_par_iter()
            .map(|(shard, len)| {
                let mut r = rng::substream(seed, tag, shard);
                let mut x = vec![0.0; norm.dim()];
                (0..len)
                    .map(|_| {
                        table.sample_into(&mut r, &mut x);
                        cost.phi(norm.norm_unchecked(&x))
                    })
                    .collect()
            })
            .collect()
    });
    mean_and_stderr(&shards.concat())
}
