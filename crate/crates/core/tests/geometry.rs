use lorentz_core::Lattice;
use lorentz_core::asymptotics::mean_free_path_exact;
use lorentz_core::ensembles::{sample_direction_uniform, EnsembleSpec, RngStream};
use lorentz_core::lattice::{free_path, GeometryError, LatticeConfig, RayQuery, Shift};
use lorentz_core::runner::{run_map, RunPlan};
use lorentz_core::statistics::santalo_check;
use rand::Rng;

fn free_point(cfg: &LatticeConfig<f64>, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let q: Vec<f64> = (0..cfg.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
        if cfg.nearest_obstacle(&q, None).is_none_or(|(_, d)| d > cfg.radius()) {
            return q;
        }
    }
}

#[test]
fn flight_is_at_least_the_gap_to_the_nearest_surface() {
    let mut rng = RngStream::new(31, 0);
    for dim in 2..=5 {
        let cfg = LatticeConfig::cubic(dim, Shift::golden(dim), 0.15).unwrap();
        for _ in 0..2000 {
            let q = free_point(&cfg, &mut rng);
            let v = sample_direction_uniform(&mut rng, dim);
            let s = free_path(&cfg, &RayQuery::new(&q, &v, 1e3)).unwrap();
            let gap = cfg.nearest_obstacle(&q, None).unwrap().1 - 0.15;
            assert!(s.tau >= gap - 1e-12, "{} < {gap}", s.tau);
        }
    }
}

#[test]
fn larger_obstacles_shorten_flights() {
    let mut rng = RngStream::new(32, 0);
    let small = LatticeConfig::cubic(3, Shift::golden(3), 0.05).unwrap();
    let large = small.with_radius(0.12).unwrap();
    for _ in 0..5000 {
        let q = free_point(&large, &mut rng);
        let v = sample_direction_uniform(&mut rng, 3);
        let a = free_path(&small, &RayQuery::new(&q, &v, 1e4)).unwrap();
        let b = free_path(&large, &RayQuery::new(&q, &v, 1e4)).unwrap();
        assert!(b.tau <= a.tau);
    }
}

#[test]
fn lattice_translation_and_reflection_symmetry() {
    let mut rng = RngStream::new(33, 0);
    let cfg = LatticeConfig::cubic(3, Shift::zero(3), 0.1).unwrap();
    for _ in 0..5000 {
        let q = free_point(&cfg, &mut rng);
        let v = sample_direction_uniform(&mut rng, 3);
        let base = free_path(&cfg, &RayQuery::new(&q, &v, 1e4)).unwrap();
        let moved: Vec<f64> = q.iter().zip([2.0, -1.0, 5.0]).map(|(a, b)| a + b).collect();
        let shifted = free_path(&cfg, &RayQuery::new(&moved, &v, 1e4)).unwrap();
        assert!((shifted.tau - base.tau).abs() <= 1e-9 * (1.0 + base.tau));
        // the cubic lattice through the origin is symmetric under x -> -x
        let mq: Vec<f64> = q.iter().map(|x| -x).collect();
        let mv: Vec<f64> = v.iter().map(|x| -x).collect();
        let mirrored = free_path(&cfg, &RayQuery::new(&mq, &mv, 1e4)).unwrap();
        assert!((mirrored.tau - base.tau).abs() <= 1e-9 * (1.0 + base.tau));
    }
}

#[test]
fn coordinate_permutation_symmetry() {
    let mut rng = RngStream::new(34, 0);
    let cfg = LatticeConfig::cubic(3, Shift::golden(3), 0.1).unwrap();
    for _ in 0..5000 {
        let q = free_point(&cfg, &mut rng);
        let v = sample_direction_uniform(&mut rng, 3);
        let base = free_path(&cfg, &RayQuery::new(&q, &v, 1e4)).unwrap();
        let pq = [q[2], q[0], q[1]];
        let pv = [v[2], v[0], v[1]];
        let permuted = free_path(&cfg, &RayQuery::new(&pq, &pv, 1e4)).unwrap();
        assert!((permuted.tau - base.tau).abs() <= 1e-9 * (1.0 + base.tau));
    }
}

#[test]
fn overlapping_or_non_unimodular_arrays_are_rejected() {
    assert!(matches!(
        Lattice::new(2, vec![1.0, 0.0, 0.0, 2.0], Shift::zero(2), 0.1),
        Err(GeometryError::NotUnimodular(_))
    ));
    // unimodular, shortest vector (0.5, 0.5) of length 0.707 < 2r
    assert!(matches!(
        Lattice::new(2, vec![2.0, 0.0, 0.5, 0.5], Shift::zero(2), 0.4),
        Err(GeometryError::Overlap { .. })
    ));
}

fn santalo(config: LatticeConfig<f64>, n: u64) {
    let (dim, r) = (config.dim(), config.radius());
    let plan = RunPlan { ensemble: EnsembleSpec::boundary(&config), config, n_samples: n, seed: 35, workers: 0, xi_cap: 100.0 };
    let out = run_map(&plan, |s| (s.tau, s.censored)).unwrap().items;
    let taus: Vec<f64> = out.iter().map(|x| x.0).collect();
    let censored = out.iter().filter(|x| x.1).count();
    let exact = mean_free_path_exact(dim, r).unwrap().length;
    let check = santalo_check(&taus, censored, plan.t_max(), exact).unwrap();
    assert!(check.pass, "{check:?}");
}

#[test]
fn santalo_on_sheared_lattices() {
    santalo(LatticeConfig::new(2, vec![1.0, 0.4, 0.0, 1.0], Shift::from_floats(vec![0.3, 0.7]), 0.1).unwrap(), 200_000);
    let m = vec![1.0, 0.2, -0.3, 0.0, 1.0, 0.25, 0.0, 0.0, 1.0];
    santalo(LatticeConfig::new(3, m, Shift::golden(3), 0.12).unwrap(), 200_000);
    santalo(LatticeConfig::cubic(4, Shift::zero(4), 0.2).unwrap(), 100_000);
}
