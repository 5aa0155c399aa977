//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use lorentz_core::asymptotics::{boca_zaharescu_bridge, mean_free_path_exact, AsymptoticConstants};
use lorentz_core::diophantine::{
    diophantine_exponent_probe, zeta_fn, zeta_fn_oracle, zeta_rational, DiophantineQuery, ORACLE_CAP,
};
use lorentz_core::ensembles::{sample_direction_uniform, EnsembleKind, EnsembleSpec, RngStream, DEFAULT_XI_CAP};
use lorentz_core::lattice::{free_path, free_path_bruteforce, LatticeConfig, RayQuery, Shift, GOLDEN_FRACTION};
use lorentz_core::runner::{run_map, RunPlan};
use lorentz_core::statistics::{
    cross_ensemble_check, dkw_half_width, entropy_constant, santalo_check, DistributionMeta, EmpiricalDistribution,
    EntropyEstimate, DEFAULT_DELTA,
};
use rand::Rng;

const SEED: u64 = 1;
const DESK: u64 = 1_000_000;
const LARGE: u64 = 10_000_000;

struct Run {
    plan: RunPlan,
    /// `(tau, censored)` in canonical order.
    flights: Vec<(f64, bool)>,
}

impl Run {
    fn new(dim: usize, r: f64, kind: EnsembleKind, n: u64) -> Self {
        let config = LatticeConfig::cubic(dim, Shift::zero(dim), r).unwrap();
        let ensemble = match kind {
            EnsembleKind::Boundary => EnsembleSpec::boundary(&config),
            EnsembleKind::Phase => EnsembleSpec::phase(&config),
            EnsembleKind::FixedPoint => unreachable!(),
        };
        let plan = RunPlan { config, ensemble, n_samples: n, seed: SEED, workers: 0, xi_cap: DEFAULT_XI_CAP };
        let start = Instant::now();
        let flights = run_map(&plan, |s| (s.tau, s.censored)).unwrap().items;
        eprintln!("  ran {kind} d={dim} r={r} n={n} in {:.1}s", start.elapsed().as_secs_f64());
        Self { plan, flights }
    }

    fn scale(&self) -> f64 {
        self.plan.config.radius().powi(self.plan.config.dim() as i32 - 1)
    }

    /// Distribution of the first `n` flights, which is exactly the `n`-sample run.
    fn distribution(&self, n: usize) -> EmpiricalDistribution {
        let meta: DistributionMeta = self.plan.meta();
        let scale = self.scale();
        EmpiricalDistribution::new(meta, self.plan.xi_cap, self.flights[..n].iter().map(|&(t, c)| (scale * t, c)))
            .unwrap()
    }

    fn santalo(&self, n: usize) -> lorentz_core::statistics::SantaloCheck {
        let taus: Vec<f64> = self.flights[..n].iter().map(|f| f.0).collect();
        let censored = self.flights[..n].iter().filter(|f| f.1).count();
        let (dim, r) = (self.plan.config.dim(), self.plan.config.radius());
        santalo_check(&taus, censored, self.plan.t_max(), mean_free_path_exact(dim, r).unwrap().length).unwrap()
    }
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("criterion {id} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn criterion_1(report: &mut Report, nu3: &Run) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (dim, r) in [(2, 0.01), (2, 0.005), (3, 0.05)] {
        let run = Run::new(dim, r, EnsembleKind::Boundary, DESK);
        let s = run.santalo(DESK as usize);
        pass &= s.pass;
        parts.push(format!("d={dim} r={r} z={:.2} bias<={:.2e}", s.zscore, s.censor_bias));
    }
    let s = nu3.santalo(DESK as usize);
    pass &= s.pass;
    parts.push(format!("d=3 r=0.02 z={:.2} bias<={:.2e}", s.zscore, s.censor_bias));
    report.line(1, "Santalo mean free path", pass, parts.join("; "));
}

fn criterion_2(report: &mut Report, nu: &EmpiricalDistribution, mu: &EmpiricalDistribution) {
    let fnu = nu.tail_fit(3.0, 20.0).unwrap();
    let fmu = mu.tail_fit(3.0, 20.0).unwrap();
    let pass = (fnu.exponent + 2.0).abs() <= 0.15 && (fmu.exponent + 1.0).abs() <= 0.15;
    report.line(
        2,
        "tail exponents",
        pass,
        format!(
            "nu slope {:.4} (r2 {:.5}), mu slope {:.4} (r2 {:.5}) over [3, 20]",
            fnu.exponent, fnu.r_squared, fmu.exponent, fmu.r_squared
        ),
    );
}

fn criterion_3(report: &mut Report, nu: &EmpiricalDistribution) {
    let c = AsymptoticConstants::<f64>::new(3).unwrap();
    let target = c.tail_c / PI;
    let ratios: Vec<f64> = (5..=15).map(|a| nu.ccdf(a as f64).unwrap().ccdf * (a * a) as f64 / target).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    let pass = lo >= 0.75 && hi <= 1.25;
    report.line(3, "tail constant", pass, format!("a^2 CCDF / (c_3/pi = {target:.6}) in [{lo:.4}, {hi:.4}] for a = 5..15"));
}

fn criterion_4(report: &mut Report, nu: &EmpiricalDistribution) {
    let c = AsymptoticConstants::<f64>::new(3).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [0.02, 0.05] {
        let p = nu.ccdf(a).unwrap();
        let predicted = c.boundary_ccdf_near_zero(a).unwrap();
        let tol = 3.0 * (p.band + 2.0 * a * a);
        pass &= (p.ccdf - predicted).abs() <= tol;
        parts.push(format!("a={a}: {:.5} vs {predicted:.5} (tol {tol:.2e})", p.ccdf));
    }
    report.line(4, "near-zero law", pass, parts.join("; "));
}

fn criterion_5(report: &mut Report, mu: &EmpiricalDistribution, nu: &EmpiricalDistribution) {
    let rows = cross_ensemble_check(mu, nu, &[0.5, 1.0, 2.0], None).unwrap();
    let pass = rows.iter().all(|r| r.within);
    let detail = rows
        .iter()
        .map(|r| format!("a={}: residual {:+.2e} / bound {:.2e}", r.a, r.residual, r.bound))
        .collect::<Vec<_>>()
        .join("; ");
    report.line(5, "cross-ensemble consistency", pass, detail);
}

fn criterion_6(report: &mut Report) {
    let ladder = [0.04, 0.02, 0.01, 0.005];
    let mut estimates: Vec<EntropyEstimate> = Vec::new();
    let mut bridge_gap: f64 = 0.0;
    for &r in &ladder {
        let run = Run::new(2, r, EnsembleKind::Boundary, DESK);
        let dist = run.distribution(DESK as usize);
        estimates.push(entropy_constant(&dist).unwrap());
        let b = boca_zaharescu_bridge(2, dist.ordered()).unwrap();
        bridge_gap = bridge_gap.max((b.direct - b.via_doubled).abs());
    }
    let gaps: Vec<f64> = estimates.iter().map(|e| (e.mean_xi.ln() + LN_2).abs()).collect();
    let steps: Vec<f64> = estimates.windows(2).map(|w| (w[1].c_r - w[0].c_r).abs()).collect();
    let a = estimates.iter().all(|e| e.c_r >= 0.0);
    let b = gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] <= 0.01;
    let c = steps.windows(2).all(|w| w[1] < w[0]);
    let d = bridge_gap <= 1e-12;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    let c_r: Vec<f64> = estimates.iter().map(|e| e.c_r).collect();
    let se: Vec<f64> = estimates.iter().map(|e| e.mean_xi_se.unwrap() / e.mean_xi).collect();
    report.line(
        6,
        "entropy constant structure",
        a && b && c && d,
        format!(
            "(a) {a} C_r = [{}]; (b) {b} |ln E xi + ln 2| = [{}] (rel. s.e. of E xi [{}]); (c) {c} |dC_r| = [{}]; (d) {d} bridge gap {bridge_gap:.1e}",
            fmt(&c_r),
            fmt(&gaps),
            fmt(&se),
            fmt(&steps)
        ),
    );
}

fn criterion_7(report: &mut Report) {
    let mut mismatches = 0;
    let mut rng = RngStream::new(SEED, 7);
    for dim in 2..=4 {
        let t_max = [12.0, 6.0, 3.0][dim - 2];
        for &r in &[0.05, 0.2] {
            let alpha: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let cfg = LatticeConfig::cubic(dim, Shift::from_floats(alpha), r).unwrap();
            for i in 0..5000 {
                let q = loop {
                    let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
                    if cfg.nearest_obstacle(&q, None).is_none_or(|(_, d)| d > r) {
                        break q;
                    }
                };
                let v: Vec<f64> = if i % 2 == 0 {
                    sample_direction_uniform(&mut rng, dim).to_vec()
                } else {
                    let z: Vec<i64> = cfg.cell_of(&q).iter().map(|&c| c + rng.random_range(-2..=2)).collect();
                    let w: Vec<f64> = cfg.center(&z).iter().zip(&q).map(|(c, q)| c - q).collect();
                    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                    w.iter().map(|x| x / n).collect()
                };
                let query = RayQuery::new(&q, &v, t_max);
                let a = free_path(&cfg, &query).unwrap();
                let b = free_path_bruteforce(&cfg, &query).unwrap();
                if a.tau.to_bits() != b.tau.to_bits() || a.censored != b.censored {
                    mismatches += 1;
                }
            }
        }
    }
    let mut zeta_mismatches = 0;
    for i in 0..1000 {
        let b: Vec<f64> = (0..1 + i % 3).map(|_| rng.random::<f64>()).collect();
        let t = 10f64.powf(rng.random_range(0.0..8.0));
        let q = DiophantineQuery::new(&b, t, ORACLE_CAP).unwrap();
        if zeta_fn(&q) != zeta_fn_oracle(&q).unwrap() {
            zeta_mismatches += 1;
        }
    }
    report.line(
        7,
        "oracle equivalence",
        mismatches == 0 && zeta_mismatches == 0,
        format!("free_path 30000 queries, {mismatches} mismatches; zeta 1000 queries, {zeta_mismatches} mismatches"),
    );
}

fn criterion_8(report: &mut Report) {
    let grid: Vec<f64> = (0..=12).map(|k| 10f64.powf(3.0 + 0.5 * k as f64)).collect();
    let probe = diophantine_exponent_probe(&[GOLDEN_FRACTION], &grid, 10_000_000).unwrap();
    let worst = (0..=31)
        .map(|k| zeta_rational(&[3], 7, 2f64.powf(1.7 * k as f64), 1000))
        .map(|z| z.unwrap().exact().unwrap_or(u64::MAX))
        .max()
        .unwrap();
    let pass = (0.28..=0.38).contains(&probe.slope) && worst <= 7;
    report.line(
        8,
        "Diophantine growth",
        pass,
        format!("golden slope {:.4} over T in [1e3, 1e9]; max zeta(3/7, T) = {worst}", probe.slope),
    );
}

fn criterion_9(report: &mut Report, dists: &[&EmpiricalDistribution]) {
    // CCDF monotone on every run
    let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.125).collect();
    let monotone = dists.iter().all(|d| {
        let p: Vec<f64> = grid.iter().map(|&a| d.ccdf(a).unwrap().ccdf).collect();
        p[0] == 1.0 && p.windows(2).all(|w| w[1] <= w[0])
    });
    // worker-count independence
    let config = LatticeConfig::cubic(3, Shift::golden(3), 0.05).unwrap();
    let plan = |workers| RunPlan {
        ensemble: EnsembleSpec::boundary(&config),
        config: config.clone(),
        n_samples: 20_000,
        seed: SEED,
        workers,
        xi_cap: DEFAULT_XI_CAP,
    };
    let deterministic = run_map(&plan(1), |s| *s).unwrap().items == run_map(&plan(4), |s| *s).unwrap().items;
    // Jensen positivity on adversarial data
    let mut rng = RngStream::new(SEED, 9);
    let jensen = (0..200).all(|_| {
        let v: Vec<f64> = (0..50).map(|_| 10f64.powf(rng.random_range(-30.0..30.0))).collect();
        entropy_constant(&EmpiricalDistribution::synthetic(EnsembleKind::Boundary, &v).unwrap()).unwrap().c_r >= 0.0
    });
    // DKW coverage on a known CCDF
    let trials = 2000;
    let covered = (0..trials)
        .filter(|_| {
            let v: Vec<f64> = (0..2000).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let d = EmpiricalDistribution::synthetic(EnsembleKind::Phase, &v).unwrap();
            let band = dkw_half_width(2000, DEFAULT_DELTA);
            (1..50).all(|i| {
                let a = i as f64 * 0.1;
                (d.ccdf(a).unwrap().ccdf - (-a).exp()).abs() <= band
            })
        })
        .count();
    let coverage = covered as f64 >= trials as f64 * (1.0 - 2.0 * DEFAULT_DELTA);
    report.line(
        9,
        "property-based substitute",
        monotone && deterministic && jensen && coverage,
        format!(
            "delta, kappa, kappa_q, kappa_1 and H(d) reported, not gated; monotone CCDF {monotone}, \
             worker independence {deterministic}, Jensen {jensen}, DKW coverage {covered}/{trials}"
        ),
    );
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut report = Report { failures: 0 };
    criterion_7(&mut report);
    criterion_8(&mut report);
    criterion_6(&mut report);
    let nu = Run::new(3, 0.02, EnsembleKind::Boundary, LARGE);
    criterion_1(&mut report, &nu);
    let nu_large = nu.distribution(LARGE as usize);
    criterion_4(&mut report, &nu_large);
    let mu = Run::new(3, 0.02, EnsembleKind::Phase, LARGE);
    let mu_large = mu.distribution(LARGE as usize);
    criterion_2(&mut report, &nu_large, &mu_large);
    criterion_3(&mut report, &nu_large);
    criterion_5(&mut report, &mu.distribution(DESK as usize), &nu.distribution(DESK as usize));
    criterion_9(&mut report, &[&nu_large, &mu_large]);
    eprintln!("acceptance finished in {:.0}s", start.elapsed().as_secs_f64());
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
