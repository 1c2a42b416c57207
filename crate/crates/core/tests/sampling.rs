use staircase_dp::rng::substream;
use staircase_dp::staircase::DEFAULT_TAIL_TOL;
use staircase_dp::{BandTable, NormSpec, StaircaseParams};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn table(eps: f64, delta: f64, gamma: f64, norm: NormSpec) -> BandTable {
    BandTable::build(&StaircaseParams::new(eps, delta, gamma, norm).unwrap(), DEFAULT_TAIL_TOL).unwrap()
}

/// Fraction of the unit ball whose points have directions in `patch`, by
/// midpoint counting on a `cells`-per-axis grid of the cube.
fn cone_fraction(norm: &NormSpec, cells: usize, patch: impl Fn(&[f64]) -> bool) -> f64 {
    let n = norm.dim();
    let (mut inside, mut hit) = (0u64, 0u64);
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    loop {
        for (xi, &i) in x.iter_mut().zip(&idx) {
            *xi = -1.0 + (2.0 * i as f64 + 1.0) / cells as f64;
        }
        let r = norm.norm(&x).unwrap();
        if r <= 1.0 {
            inside += 1;
            let u: Vec<f64> = x.iter().map(|v| v / r).collect();
            if patch(&u) {
                hit += 1;
            }
        }
        let mut d = 0;
        loop {
            if d == n {
                return hit as f64 / inside as f64;
            }
            idx[d] += 1;
            if idx[d] < cells {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[test]
fn directions_follow_the_cone_measure() {
    type Patch = fn(&[f64]) -> bool;
    let patches: [(&str, Patch); 3] = [
        ("polar cap", |u| u[0].abs() >= 0.5),
        ("equatorial band", |u| u[0].abs() < 0.2),
        ("corners", |u| u.iter().all(|v| v.abs() >= 0.3)),
    ];
    let draws = 200_000;
    for p in [1.0, 2.0, f64::INFINITY] {
        for n in [2usize, 3] {
            let norm = NormSpec::new(p, n).unwrap();
            let cells = if n == 2 { 2000 } else { 160 };
            let mut rng = substream(5, "cone", n as u64);
            let sample: Vec<Vec<f64>> = (0..draws).map(|_| norm.sample_direction(&mut rng)).collect();
            for (name, patch) in patches {
                let sigma = cone_fraction(&norm, cells, patch);
                let freq = sample.iter().filter(|u| patch(u)).count() as f64 / draws as f64;
                let se = (sigma * (1.0 - sigma) / draws as f64).sqrt().max(1e-6);
                assert!((freq - sigma).abs() <= 4.0 * se, "p={p} n={n} {name}: empirical {freq} vs cone {sigma}");
            }
        }
    }
}

/// χ² independence test of radius octile against direction octile.
#[test]
fn radius_and_direction_are_independent() {
    let norm = NormSpec::l2(3).unwrap();
    let t = table(1.0, 1.0, 0.4, norm);
    let draws = t.sample_sharded(77, "polar", 1_000_000);
    let radii: Vec<f64> = draws.iter().map(|x| norm.norm(x).unwrap()).collect();
    let first: Vec<f64> = draws.iter().zip(&radii).map(|(x, r)| x[0] / r).collect();
    let octiles = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        (1..8).map(|i| s[i * s.len() / 8]).collect::<Vec<f64>>()
    };
    let (rq, uq) = (octiles(&radii), octiles(&first));
    let bin = |q: &[f64], v: f64| q.partition_point(|&c| c <= v);
    let mut table = [[0f64; 8]; 8];
    for (r, u) in radii.iter().zip(&first) {
        table[bin(&rq, *r)][bin(&uq, *u)] += 1.0;
    }
    let total = draws.len() as f64;
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..8).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut chi2 = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            let expected = rows[i] * cols[j] / total;
            chi2 += (table[i][j] - expected).powi(2) / expected;
        }
    }
    let p_value = 1.0 - ChiSquared::new(49.0).unwrap().cdf(chi2);
    assert!(p_value > 1e-3, "chi2 = {chi2}, p = {p_value}");
}

#[test]
fn draws_scale_with_delta() {
    let norm = NormSpec::new(1.5, 4).unwrap();
    let unit = table(2.0, 1.0, 0.3, norm).sample_sharded(3, "scale", 5000);
    let wide = table(2.0, 2.5, 0.3, norm).sample_sharded(3, "scale", 5000);
    for (a, b) in unit.iter().zip(&wide) {
        for (u, w) in a.iter().zip(b) {
            assert!((2.5 * u - w).abs() <= 1e-12 * w.abs().max(1e-300), "{u} vs {w}");
        }
    }
}

#[test]
fn radii_match_the_analytic_cdf_across_norms() {
    for (p, n, eps, gamma) in [(f64::INFINITY, 2, 0.5, 0.8), (1.0, 15, 4.0, 0.1), (3.0, 1, 8.0, 0.0)] {
        let t = table(eps, 1.0, gamma, NormSpec::new(p, n).unwrap());
        let mut rng = substream(19, "ks", n as u64);
        let mut radii: Vec<f64> = t.sample_radii(&mut rng, 100_000).into_iter().map(|(_, r)| r).collect();
        radii.sort_by(f64::total_cmp);
        let m = radii.len() as f64;
        let ks = radii.iter().enumerate().fold(0.0f64, |d, (i, &r)| {
            let f = t.radial_cdf(r);
            d.max(f - i as f64 / m).max((i + 1) as f64 / m - f)
        });
        // 1.95/√m is the 0.1% critical value of the Kolmogorov distribution
        assert!(ks < 1.95 / m.sqrt(), "p={p} n={n}: KS = {ks}");
    }
}

#[test]
fn thread_count_does_not_change_draws() {
    let t = table(1.0, 1.0, 0.5, NormSpec::l2(2).unwrap());
    let many = t.sample_sharded(1, "threads", 200_000);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = pool.install(|| t.sample_sharded(1, "threads", 200_000));
    assert_eq!(many, one);
}
