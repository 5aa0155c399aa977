use lorentz_core::diophantine::{
    diophantine_exponent_probe, zeta_fn, zeta_fn_oracle, zeta_rational, DiophantineQuery, Zeta, ORACLE_CAP,
};
use lorentz_core::ensembles::RngStream;
use lorentz_core::lattice::GOLDEN_FRACTION;
use rand::Rng;

fn random_b(rng: &mut RngStream, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| match rng.random_range(0..4) {
            // short dyadic and small-denominator values hit the boundary cases
            0 => rng.random_range(0..64) as f64 / 64.0,
            1 => rng.random_range(0..7) as f64 / 7.0,
            _ => rng.random::<f64>(),
        })
        .collect()
}

#[test]
fn scan_matches_exact_oracle() {
    let mut rng = RngStream::new(17, 0);
    let mut exact = 0;
    for i in 0..1000 {
        let dim = 1 + i % 3;
        let b = random_b(&mut rng, dim);
        let horizon = 10f64.powf(rng.random_range(0.0..8.0));
        let query = DiophantineQuery::new(&b, horizon, ORACLE_CAP).unwrap();
        let fast = zeta_fn(&query);
        assert_eq!(fast, zeta_fn_oracle(&query).unwrap(), "b = {b:?}, T = {horizon}");
        if matches!(fast, Zeta::Exact(_)) {
            exact += 1;
        }
    }
    assert!(exact > 900);
}

#[test]
fn zeta_is_non_decreasing_in_the_horizon() {
    let mut rng = RngStream::new(18, 0);
    for dim in 1..=3 {
        let b = random_b(&mut rng, dim);
        let mut prev = 0;
        for k in 0..60 {
            let t = 10f64.powf(k as f64 * 0.15);
            let n = zeta_fn(&DiophantineQuery::new(&b, t, 10_000_000).unwrap()).exact().unwrap();
            assert!(n >= prev, "b = {b:?}, T = {t}");
            prev = n;
        }
    }
}

#[test]
fn integer_translates_leave_zeta_unchanged() {
    let mut rng = RngStream::new(19, 0);
    for _ in 0..200 {
        let b = random_b(&mut rng, 2);
        let t = 10f64.powf(rng.random_range(0.0..6.0));
        let shifted: Vec<f64> = b.iter().map(|x| x + 3.0).collect();
        let negated: Vec<f64> = b.iter().map(|x| -x).collect();
        let z = zeta_fn(&DiophantineQuery::new(&b, t, 1_000_000).unwrap());
        // 3 + x is exact for dyadic x with at most 50 fractional bits; compare on those
        if b.iter().all(|x| (x + 3.0) - 3.0 == *x) {
            assert_eq!(z, zeta_fn(&DiophantineQuery::new(&shifted, t, 1_000_000).unwrap()));
        }
        assert_eq!(z, zeta_fn(&DiophantineQuery::new(&negated, t, 1_000_000).unwrap()));
    }
}

#[test]
fn golden_growth_rate() {
    let grid: Vec<f64> = (0..=12).map(|k| 10f64.powf(3.0 + 0.5 * k as f64)).collect();
    let probe = diophantine_exponent_probe(&[GOLDEN_FRACTION], &grid, 10_000_000).unwrap();
    assert!((0.28..=0.38).contains(&probe.slope), "{probe:?}");
}

#[test]
fn three_sevenths_plateaus() {
    for k in 0..=27 {
        let t = 10f64.powf(k as f64 * 0.5);
        let z = zeta_rational(&[3], 7, t, 1000).unwrap().exact().unwrap();
        assert!(z <= 7, "T = {t}: {z}");
        let float = zeta_fn(&DiophantineQuery::new(&[3.0 / 7.0], t, 1000).unwrap()).exact().unwrap();
        assert!(float <= 7);
    }
}

#[test]
fn integer_vector_is_always_one() {
    for t in [1e-3, 1.0, 1e9, 9e15] {
        assert_eq!(zeta_rational(&[0, 5], 1, t, 10).unwrap(), Zeta::Exact(1));
        assert_eq!(zeta_fn(&DiophantineQuery::new(&[0.0, 2.0], t, 10).unwrap()), Zeta::Exact(1));
    }
}
