use proptest::prelude::*;
use rand::Rng;
use staircase_dp::dpverify::{check_maximal_decay, check_radial_loglip};
use staircase_dp::rearrange::{
    check_domination, find_mass_matching_y, make_rho_y, random_dp_profile, rearrange_profile, rearrange_set, GridSet,
    ProfileLaw,
};
use staircase_dp::rng::substream;
use staircase_dp::{NormSpec, ProfileTail, RadialProfile};

fn dyadic_set() -> impl Strategy<Value = GridSet> {
    prop::collection::vec((-512i32..512, 0i32..=256), 0..6).prop_map(|iv| {
        GridSet::new(
            iv.into_iter()
                .map(|(a, len)| (f64::from(a) / 64.0, f64::from(a + len) / 64.0))
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn set_rearrangement_inequalities(a in dyadic_set(), b in dyadic_set()) {
        let (sa, sb) = (rearrange_set(&a), rearrange_set(&b));
        prop_assert_eq!(sa.measure(), a.measure());
        prop_assert!(sa.difference(&sb).measure() <= a.difference(&b).measure());
        prop_assert!(sa.intersection(&sb).measure() >= a.intersection(&b).measure());
        prop_assert!(sa.minkowski_sum(&sb).measure() <= a.minkowski_sum(&b).measure());
    }

    #[test]
    fn set_algebra_is_consistent(a in dyadic_set(), b in dyadic_set()) {
        let union = a.union(&b).measure();
        prop_assert_eq!(union, a.measure() + b.measure() - a.intersection(&b).measure());
        prop_assert_eq!(a.difference(&b).measure() + a.intersection(&b).measure(), a.measure());
    }
}

/// A random compactly supported step profile with `cells` cells.
fn random_step<R: Rng + ?Sized>(rng: &mut R, cells: usize) -> RadialProfile {
    let mut breaks = vec![0.0];
    for _ in 0..cells {
        let last = *breaks.last().unwrap();
        breaks.push(last + rng.random_range(0.1..1.5));
    }
    let values = (0..cells).map(|_| f64::from(rng.random_range(0..6u8)) * 0.25).collect();
    RadialProfile::new(breaks, values, ProfileTail::Zero).unwrap()
}

fn superlevel_volume(profile: &RadialProfile, norm: &NormSpec, level: f64) -> f64 {
    profile
        .cells()
        .iter()
        .filter(|c| c.value > level)
        .map(|c| norm.ball_volume(c.end) - norm.ball_volume(c.start))
        .sum()
}

#[test]
fn superlevel_sets_of_the_rearrangement_are_centered_balls() {
    let mut rng = substream(21, "level-sets", 0);
    for case in 0..300 {
        let norm = NormSpec::new([1.0, 2.0, f64::INFINITY][case % 3], 1 + case % 4).unwrap();
        let cells = rng.random_range(1..=7);
        let f = random_step(&mut rng, cells);
        let star = rearrange_profile(&f, &norm).unwrap();
        let mut levels: Vec<f64> = f.values().to_vec();
        levels.push(0.0);
        for &level in &levels {
            let cells = star.cells();
            let above = cells.iter().take_while(|c| c.value > level).count();
            assert!(cells[above..].iter().all(|c| c.value <= level), "case {case}: not a ball at {level}");
            let (v_star, v) = (superlevel_volume(&star, &norm, level), superlevel_volume(&f, &norm, level));
            assert!((v_star - v).abs() <= 1e-10 * v.max(1.0), "case {case}: volumes {v_star} vs {v}");
        }
    }
}

#[test]
fn rearrangement_commutes_with_squaring() {
    let mut rng = substream(22, "squares", 0);
    for case in 0..300 {
        let norm = NormSpec::new([1.0, 2.0, 3.0][case % 3], 1 + case % 3).unwrap();
        let cells = rng.random_range(1..=7);
        let f = random_step(&mut rng, cells);
        let a = rearrange_profile(&f.map_values(|v| v * v), &norm).unwrap();
        let b = rearrange_profile(&f, &norm).unwrap().map_values(|v| v * v);
        let mut grid: Vec<f64> = a.breaks().iter().chain(b.breaks()).copied().collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        for w in grid.windows(2) {
            if w[1] - w[0] < 1e-9 {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            assert_eq!(a.value_at(mid), b.value_at(mid), "case {case} at r = {mid}");
        }
    }
}

fn random_setting<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, NormSpec) {
    let eps = rng.random_range(0.3..4.0);
    let delta = rng.random_range(0.3..2.5);
    let p = [1.0, 2.0, 3.0, f64::INFINITY][rng.random_range(0..4)];
    (eps, delta, NormSpec::new(p, rng.random_range(1..=6)).unwrap())
}

#[test]
fn mass_matching_chain_lands_in_the_decay_class_and_dominates() {
    let mut rng = substream(23, "chain", 0);
    for case in 0..150 {
        let (eps, delta, norm) = random_setting(&mut rng);
        let (periods, cells) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let raw = random_dp_profile(&mut rng, eps, delta, periods, cells).unwrap();
        let star = rearrange_profile(&raw, &norm).unwrap();
        assert!(check_radial_loglip(&star, eps, delta), "case {case}");
        let (y, out) = find_mass_matching_y(&star, &norm, eps, delta, 1e-12).unwrap();
        assert!(check_maximal_decay(&out, eps, delta, 1e-9), "case {case}");
        let n = norm.dim() as u32;
        assert!((out.moment(n) / star.moment(n) - 1.0).abs() <= 1e-10, "case {case}: y = {y}");
        let (law_out, law_raw) = (ProfileLaw::new(&out, norm).unwrap(), ProfileLaw::new(&raw, norm).unwrap());
        assert!(check_domination(&law_out, &law_raw, 1e-12).unwrap(), "case {case}");
        assert!(law_out.mean() <= law_raw.mean() * (1.0 + 1e-12), "case {case}");
    }
}

#[test]
fn rho_y_crosses_rho_once_at_y() {
    let mut rng = substream(24, "crossing", 0);
    for case in 0..200 {
        let (eps, delta, norm) = random_setting(&mut rng);
        let (periods, cells) = (rng.random_range(1..=4), rng.random_range(1..=5));
        let rho = rearrange_profile(&random_dp_profile(&mut rng, eps, delta, periods, cells).unwrap(), &norm).unwrap();
        let y = rng.random_range(0.0..rho.window_end() + 2.0 * delta);
        let rho_y = make_rho_y(&rho, y, eps, delta).unwrap();
        let reach = y + rho.window_end() + 3.0 * delta;
        let mut grid: Vec<f64> = rho.cells_until(reach).iter().chain(&rho_y.cells_until(reach)).map(|c| c.start).collect();
        grid.push(y);
        grid.push(reach);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        for w in grid.windows(2) {
            if w[1] - w[0] <= 1e-9 * reach {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let (a, b) = (rho_y.value_at(mid), rho.value_at(mid));
            let slack = 1e-12 * a.max(b);
            if mid < y {
                assert!(a >= b - slack, "case {case}: rho_y below rho at {mid} < y = {y}");
            } else {
                assert!(a <= b + slack, "case {case}: rho_y above rho at {mid} > y = {y}");
            }
        }
    }
}
