use lorentz_core::ensembles::{sample_direction_uniform, RngStream};
use lorentz_core::lattice::{free_path, free_path_bruteforce, LatticeConfig, RayQuery, Shift};
use rand::Rng;

const QUERIES: usize = 10_000;

fn sheared(dim: usize, s: f64) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
        for j in i + 1..dim {
            m[i * dim + j] = s / (1 + j - i) as f64;
        }
    }
    m
}

fn free_start(cfg: &LatticeConfig<f64>, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let q: Vec<f64> = (0..cfg.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
        if cfg.nearest_obstacle(&q, None).is_none_or(|(_, dist)| dist > cfg.radius()) {
            return q;
        }
    }
}

/// Half the directions are uniform, half aim at a nearby obstacle with an offset of up
/// to `1.2 r`, so grazing hits and near misses are common.
fn query(cfg: &LatticeConfig<f64>, rng: &mut RngStream, t_max: f64) -> RayQuery<f64> {
    let dim = cfg.dim();
    let q = free_start(cfg, rng);
    let v: Vec<f64> = if rng.random::<bool>() {
        sample_direction_uniform(rng, dim).to_vec()
    } else {
        let cell = cfg.cell_of(&q);
        let z: Vec<i64> = cell.iter().map(|&c| c + rng.random_range(-2..=2)).collect();
        let c = cfg.center(&z);
        let jitter = sample_direction_uniform(rng, dim);
        let scale = 1.2 * cfg.radius() * rng.random::<f64>();
        let w: Vec<f64> = (0..dim).map(|i| c[i] + scale * jitter[i] - q[i]).collect();
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-9 {
            sample_direction_uniform(rng, dim).to_vec()
        } else {
            w.iter().map(|x| x / n).collect()
        }
    };
    RayQuery::new(&q, &v, t_max)
}

fn check(dim: usize, t_max: f64, seed: u64) {
    let mut rng = RngStream::new(seed, dim as u64);
    let mut hits = 0;
    for (i, &r) in [0.05, 0.2].iter().enumerate() {
        for (j, shear) in [0.0, 0.35].iter().enumerate() {
            let alpha: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let cfg = LatticeConfig::new(dim, sheared(dim, *shear), Shift::from_floats(alpha), r).unwrap();
            for _ in 0..QUERIES / 4 {
                let query = query(&cfg, &mut rng, t_max);
                let fast = free_path(&cfg, &query).unwrap();
                let slow = free_path_bruteforce(&cfg, &query).unwrap();
                assert_eq!(fast.censored, slow.censored, "r={r} shear#{j} {query:?}");
                assert_eq!(fast.tau.to_bits(), slow.tau.to_bits(), "case {i}/{j}: {query:?}");
                if !fast.censored {
                    hits += 1;
                }
            }
        }
    }
    assert!(hits > QUERIES / 4, "{hits} hits");
}

#[test]
fn planar_queries_match_the_oracle() {
    check(2, 12.0, 1);
}

#[test]
fn spatial_queries_match_the_oracle() {
    check(3, 6.0, 2);
}

#[test]
fn four_dimensional_queries_match_the_oracle() {
    check(4, 3.0, 3);
}

#[test]
fn single_precision_matches_its_oracle() {
    let mut rng = RngStream::new(4, 0);
    let cfg = LatticeConfig::<f32>::cubic(3, Shift::golden(3), 0.1).unwrap();
    let cfg64 = LatticeConfig::<f64>::cubic(3, Shift::golden(3), 0.1).unwrap();
    for _ in 0..2000 {
        let q64 = query(&cfg64, &mut rng, 5.0);
        let q: Vec<f32> = q64.q.iter().map(|&x| x as f32).collect();
        let v: Vec<f32> = q64.v.iter().map(|&x| x as f32).collect();
        let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
        let v: Vec<f32> = v.iter().map(|x| x / norm).collect();
        let query = RayQuery::new(&q, &v, 5.0f32);
        match (free_path(&cfg, &query), free_path_bruteforce(&cfg, &query)) {
            (Ok(a), Ok(b)) => assert_eq!(a.tau.to_bits(), b.tau.to_bits()),
            (Err(a), Err(b)) => assert_eq!(a, b),
            (a, b) => panic!("{a:?} vs {b:?}"),
        }
    }
}
