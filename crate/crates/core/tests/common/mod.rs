#![allow(dead_code)]

use rand::Rng;
use staircase_dp::profile::{ProfileTail, RadialProfile};
use staircase_dp::rearrange::GridSet;

/// A one-period profile on `cells` equal cells that decays gently except
/// for a single jump of `jump` between two adjacent cells.
pub fn violator<R: Rng + ?Sized>(rng: &mut R, eps: f64, delta: f64, jump: f64, cells: usize) -> RadialProfile {
    let at = rng.random_range(1..cells);
    let breaks: Vec<f64> = (0..=cells).map(|i| i as f64 * delta / cells as f64).collect();
    let mut ln_v = 0.0;
    let values = (0..cells)
        .map(|i| {
            if i == at {
                ln_v -= jump;
            } else if i > 0 {
                ln_v -= 0.1 * eps / cells as f64;
            }
            ln_v.exp()
        })
        .collect();
    RadialProfile::new(breaks, values, ProfileTail::MaximalDecay { eps, delta }).unwrap()
}

/// A jump drawn from `(ε, 4ε]`.
pub fn violating_jump<R: Rng + ?Sized>(rng: &mut R, eps: f64) -> f64 {
    4.0 * eps - 3.0 * eps * rng.random::<f64>()
}

/// A random grid set with dyadic endpoints in `[-8, 8]`, so every measure,
/// sum and difference below is exact in `f64`.
pub fn dyadic_set<R: Rng + ?Sized>(rng: &mut R) -> GridSet {
    let count = rng.random_range(0..=5);
    let intervals = (0..count)
        .map(|_| {
            let a = f64::from(rng.random_range(-512i32..512)) / 64.0;
            let len = f64::from(rng.random_range(0i32..=256)) / 64.0;
            (a, a + len)
        })
        .collect();
    GridSet::new(intervals).unwrap()
}

/// A random nonincreasing one-period profile on `cells` equal cells whose
/// total drop is at most `ε`, with a decay tail, normalised.
pub fn random_decay_profile<R: Rng + ?Sized>(
    rng: &mut R,
    eps: f64,
    delta: f64,
    cells: usize,
    norm: &staircase_dp::NormSpec,
) -> RadialProfile {
    let mut cuts: Vec<f64> = (0..cells - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let values = std::iter::once(0.0).chain(cuts).map(|c| (-eps * c).exp()).collect();
    let breaks = (0..=cells).map(|i| i as f64 * delta / cells as f64).collect();
    RadialProfile::new(breaks, values, ProfileTail::MaximalDecay { eps, delta })
        .unwrap()
        .normalized(norm)
        .unwrap()
}
