//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use graphon_lab::gcn::{linearization_gap, Activation, GcnConfig};
use graphon_lab::graphon::{degree_function, delta_distance, family_generate, family_validity_range};
use graphon_lab::rng::rng_for;
use graphon_lab::sampling::{sample_graph, EdgeCoupling};
use graphon_lab::spectral::{cheeger_check, mixing_time, power_limit_gap, RwChain};
use graphon_lab::testing::stats::{default_depth, power_law_exponent, quantile_sorted};
use graphon_lab::testing::{embedding_distance_experiment, monte_carlo_error, tv_perturbed, DistanceConstants};
use graphon_lab::{FamilySpec, SampledGraph, SbmParams, StepGraphon};
use ndarray::{array, Array1};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn separated_pair() -> (StepGraphon, StepGraphon) {
    (
        SbmParams::new(0.5, 0.6, 0.4, 0.2).unwrap().to_graphon().unwrap(),
        SbmParams::new(0.5, 0.55, 0.45, 0.2).unwrap().to_graphon().unwrap(),
    )
}

fn family_pair() -> (StepGraphon, StepGraphon) {
    let base = SbmParams::new(0.5, 0.6, 0.4, 0.2).unwrap();
    let moved = family_generate(&FamilySpec { base, tau: 0.05 }).unwrap();
    (base.to_graphon().unwrap(), moved.to_graphon().unwrap())
}

fn random_connected(rng: &mut ChaCha8Rng, n_max: usize, p_lo: f64, p_hi: f64) -> SampledGraph {
    loop {
        let n = rng.gen_range(3..=n_max);
        let p = rng.gen_range(p_lo..p_hi);
        let mut g = SampledGraph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    g.add_edge(u, v);
                }
            }
        }
        if g.is_connected() {
            return g;
        }
    }
}

fn c1_delta_formula() -> Outcome {
    let (w0, w1) = separated_pair();
    let d = delta_distance(&w0, &w1);
    let reps = 1000;
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(delta_distance(std::hint::black_box(&w0), &w1));
    }
    let per_call = start.elapsed() / reps;
    let err = (d - 1.0 / 14.0).abs();
    outcome(
        err <= 1e-9 && per_call < Duration::from_millis(1),
        format!("delta = {d:.12} (|err| = {err:.1e}, expected 1/14), {per_call:?} per call"),
    )
}

fn c2_family_exceptionality() -> Outcome {
    let mut rng = rng_for(SEED, 100);
    let (mut worst_delta, mut worst_profile) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < 50 {
        let k1 = rng.gen_range(0.1..0.9);
        let base = SbmParams::new(k1, rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0)).unwrap();
        let range = family_validity_range(&base).unwrap();
        if range.max - range.min < 1e-6 {
            continue;
        }
        let tau = range.min + (range.max - range.min) * rng.gen_range(0.01..1.0);
        let moved = family_generate(&FamilySpec { base, tau }).unwrap();
        let (w0, w1) = (base.to_graphon().unwrap(), moved.to_graphon().unwrap());
        worst_delta = worst_delta.max(delta_distance(&w0, &w1).abs());
        let (d0, d1) = (degree_function(&w0), degree_function(&w1));
        for (a, b) in d0.values.iter().zip(&d1.values) {
            worst_profile = worst_profile.max((a - b).abs());
        }
        done += 1;
    }
    outcome(
        worst_delta <= 1e-12 && worst_profile <= 1e-12,
        format!("50 draws: max delta {worst_delta:.1e}, max profile difference {worst_profile:.1e}"),
    )
}

fn c3_limit_gap() -> Outcome {
    let mut rng = rng_for(SEED, 101);
    let mut worst_ratio = 0.0f64;
    let mut cases = 0;
    let mut lazy_used = 0;
    for _ in 0..30 {
        let g = random_connected(&mut rng, 100, 0.05, 0.6);
        let chain = RwChain::<f64>::from_graph(&g).unwrap();
        let chain = if g.is_bipartite() {
            lazy_used += 1;
            chain.lazy()
        } else {
            chain
        };
        let n = g.n() as f64;
        for eps in [0.1, 0.01, 1.0 / (n * n)] {
            let t = mixing_time(&chain, eps, 1_000_000).unwrap().t_mix;
            worst_ratio = worst_ratio.max(power_limit_gap(&chain, t) / (2.0 * eps));
            cases += 1;
        }
    }
    outcome(
        worst_ratio <= 1.0,
        format!("{cases} cases ({lazy_used} bipartite graphs on the lazy walk): max gap / 2eps = {worst_ratio:.3}"),
    )
}

fn c4_cheeger() -> Outcome {
    let mut rng = rng_for(SEED, 102);
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut tightest = f64::INFINITY;
    let mut run = |label: String, g: &SampledGraph, lazy: bool| {
        let r = cheeger_check(g, lazy, 12).unwrap();
        checks += 1;
        tightest = tightest.min((r.gap - r.lower).min(r.upper - r.gap));
        if !r.holds {
            failures.push(format!("{label}: phi {} gap {}", r.phi, r.gap));
        }
    };
    for i in 0..100 {
        let g = random_connected(&mut rng, 12, 0.15, 0.9);
        run(format!("sample {i}"), &g, false);
        run(format!("sample {i} lazy"), &g, true);
    }
    run("K4".into(), &SampledGraph::complete(4), false);
    run("C6 lazy".into(), &SampledGraph::cycle(6), true);
    run("barbell".into(), &SampledGraph::barbell(4), false);
    run("barbell lazy".into(), &SampledGraph::barbell(4), true);
    outcome(
        failures.is_empty(),
        format!("{checks} checks, {} violations, smallest slack {tightest:.2e} {failures:?}", failures.len()),
    )
}

fn c5_mixing_scaling() -> Outcome {
    let w = separated_pair().0;
    let seeds = 5u64;
    let mut ds = Vec::new();
    let mut parts = Vec::new();
    let start = Instant::now();
    for n in [125usize, 250, 500, 1000] {
        let eps = 1.0 / (n * n) as f64;
        let mut ts: Vec<f64> = (0..seeds)
            .map(|s| {
                let g = sample_graph(&w, n, SEED + 1000 * n as u64 + s).unwrap();
                let chain = RwChain::<f64>::from_graph(&g).unwrap();
                mixing_time(&chain, eps, 10_000).unwrap().t_mix as f64
            })
            .collect();
        ts.sort_by(f64::total_cmp);
        let median = quantile_sorted(&ts, 0.5);
        let d = median / (n as f64 / eps).ln();
        ds.push(d);
        parts.push(format!("n={n}: t_mix {median} D {d:.3}"));
    }
    let (lo, hi) = ds.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let variation = (hi - lo) / lo;
    outcome(
        variation < 0.25,
        format!("{}; variation {variation:.3} in {:.1?}", parts.join(", "), start.elapsed()),
    )
}

fn c6_embedding_regimes() -> Outcome {
    let sizes = [250usize, 500, 1000];
    let trials = 200;
    let (f0, f1) = family_pair();
    let (s0, s1) = separated_pair();
    let mut p95 = Vec::new();
    let mut ratios = Vec::new();
    for &n in &sizes {
        let cfg = GcnConfig::<f64>::identity(default_depth(n), Activation::Identity).unwrap();
        let fam = embedding_distance_experiment(&f0, &f1, n, &cfg, trials, SEED + n as u64, EdgeCoupling::Independent, DistanceConstants::default())
            .unwrap();
        p95.push(fam.sorted.p95);
        let sep = embedding_distance_experiment(&s0, &s1, n, &cfg, trials, SEED + 7 * n as u64, EdgeCoupling::Independent, DistanceConstants::default())
            .unwrap();
        ratios.push(sep.sorted.median / (sep.delta / n as f64));
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let exponent = power_law_exponent(&xs, &p95);
    let a = exponent <= -1.3;
    let b = ratios.iter().all(|&r| (0.5..=2.0).contains(&r));
    outcome(
        a && b,
        format!(
            "(a) family p95 {:?}, exponent {exponent:.3} [{}]; (b) separated median / (delta/n) {:?} [{}]",
            p95.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>(),
            if a { "ok" } else { "fail" },
            ratios.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>(),
            if b { "ok" } else { "fail" },
        ),
    )
}

/// Two uniform boxes of equal volume have density ratio 1 on their overlap,
/// so the TV distance is the mass of the first box outside the second.
fn monte_carlo_tv(m0: &Array1<f64>, m1: &Array1<f64>, eps: f64, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut outside = 0usize;
    for _ in 0..samples {
        if m0.iter().zip(m1).any(|(a, b)| (a + rng.gen_range(-eps..=eps) - b).abs() > eps) {
            outside += 1;
        }
    }
    outside as f64 / samples as f64
}

fn c7_tv_oracle() -> Outcome {
    let mut rng = rng_for(SEED, 103);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let eps = rng.gen_range(0.05..1.0);
        let m0: Array1<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m1: Array1<f64> = m0.iter().map(|x| x + rng.gen_range(-1.2 * eps..1.2 * eps)).collect();
        let exact = tv_perturbed(&m0, &m1, eps).unwrap().tv;
        let mc = monte_carlo_tv(&m0, &m1, eps, 1_000_000, &mut rng);
        worst = worst.max((exact - mc).abs());
    }
    let one_d = tv_perturbed(&array![0.0], &array![1.0], 1.0).unwrap().tv;
    outcome(
        worst <= 0.01 && one_d == 0.5,
        format!("20 instances, max |exact - MC| {worst:.4}; 1-D case {one_d}"),
    )
}

fn c8_achievability() -> Outcome {
    let (w0, w1) = separated_pair();
    let n = 500;
    let delta = delta_distance(&w0, &w1);
    let cfg = GcnConfig::<f64>::identity(default_depth(n), Activation::Identity).unwrap();
    let r = monte_carlo_error(&w0, &w1, n, &cfg, delta / (4.0 * n as f64), 200, SEED + 8).unwrap();
    let accuracy = 1.0 - r.error_rate;
    outcome(
        accuracy >= 0.95,
        format!("accuracy {accuracy:.3} over {} trials (K = {}), 95% CI of error {:.3?}", r.trials, r.depth, r.ci95),
    )
}

fn c9_floor_consistency() -> Outcome {
    let (w0, w1) = family_pair();
    let n = 500;
    let cfg = GcnConfig::<f64>::identity(default_depth(n), Activation::Identity).unwrap();
    let r = monte_carlo_error(&w0, &w1, n, &cfg, 10.0 / n as f64, 400, SEED + 9).unwrap();
    outcome(
        !r.significantly_below_floor && r.error_rate >= 0.25,
        format!(
            "error {:.3} ({}/{}), mean Le Cam floor {:.3}, one-sided p = {:.3}",
            r.error_rate, r.errors, r.trials, r.lecam_floor, r.floor_p_value
        ),
    )
}

fn c10_linearization() -> Outcome {
    let w = separated_pair().0;
    let mut gaps = Vec::new();
    let mut parts = Vec::new();
    let mut within = true;
    for n in [250usize, 500, 1000] {
        let g = sample_graph(&w, n, SEED + 10 + n as u64).unwrap();
        let cfg = GcnConfig::<f64>::identity(default_depth(n), Activation::Tanh).unwrap();
        let r = linearization_gap(&g, &cfg).unwrap();
        within &= r.gap <= r.bound;
        gaps.push(r.gap);
        parts.push(format!("n={n}: gap {:.3e} bound {:.3e}", r.gap, r.bound));
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    outcome(within && decreasing, format!("{} (c = {})", parts.join(", "), graphon_lab::gcn::NONLINEARITY_CONSTANT))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("delta formula", c1_delta_formula),
        ("family exceptionality", c2_family_exceptionality),
        ("limit gap at mixing time", c3_limit_gap),
        ("Cheeger sandwich", c4_cheeger),
        ("mixing-time scaling", c5_mixing_scaling),
        ("embedding distance regimes", c6_embedding_regimes),
        ("TV oracle", c7_tv_oracle),
        ("achievability", c8_achievability),
        ("floor consistency", c9_floor_consistency),
        ("nonlinearity reduction", c10_linearization),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {:>2} ({name}): {} [{:.1?}]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
