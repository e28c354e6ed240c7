//! End-to-end acceptance checks, one line per criterion.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use stochnum::channel::{ltf_step_coefficients, sample_ltf_into, LtfChannelModel, TimeGrid};
use stochnum::harness::{
    oracle_small_instance, run_into, run_time_varying_utilities, sweep_delta, sweep_t, verify_convex_order, CoefSpec,
    RunConfig, StepRule,
};
use stochnum::layers::{power_cap_bound, power_optimal_generic, power_optimal_quadratic, PowerCost};
use stochnum::network::{enumerate_maximal_independent_sets, ConflictGraph};
use stochnum::rng::{seeded_rng, StreamKey};
use stochnum::solver::{converged, step_size};

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn config(name: &str) -> RunConfig {
    RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).unwrap()
}

fn ks_p_value(d: f64, n: usize) -> f64 {
    let x = d * (n as f64).sqrt();
    let p: f64 = (1..=100).map(|k| {
        let k = k as f64;
        2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * x * x).exp()
    }).sum();
    p.clamp(0.0, 1.0)
}

fn discretization_exactness() -> Outcome {
    let model = LtfChannelModel::constant(100.0, 70.0, 25.0, 70.0).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 500).unwrap();
    let c = ltf_step_coefficients(&model, &grid, 64).unwrap();
    let paths = 10_000;
    let mut x = vec![0.0; 501];
    let mut ends: Vec<f64> = (0..paths)
        .map(|m| {
            sample_ltf_into(70.0, &c, StreamKey::new(11, m, 0), &mut x);
            x[500]
        })
        .collect();
    let n = paths as f64;
    let mean = ends.iter().sum::<f64>() / n;
    let var = ends.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let exact_var = 625.0 / 200.0 * (1.0 - f64::exp(-200.0));
    let se_mean = (var / n).sqrt();
    let se_var = var * (2.0 / (n - 1.0)).sqrt();
    ends.sort_by(f64::total_cmp);
    let dist = Normal::new(70.0, exact_var.sqrt()).unwrap();
    let d = ends
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = dist.cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let p = ks_p_value(d, paths as usize);
    let z_mean = (mean - 70.0).abs() / se_mean;
    let z_var = (var - exact_var).abs() / se_var;
    Outcome {
        pass: z_mean <= 3.0 && z_var <= 3.0 && p > 0.01,
        detail: format!("mean {mean:.5} (z {z_mean:.2}), variance {var:.5} vs {exact_var} (z {z_var:.2}), KS p {p:.3}"),
    }
}

fn convex_order(dir: &Path) -> Outcome {
    let r = verify_convex_order(&config("convex_order.toml"), &[0.0, 5.0, 20.0, 25.0, 50.0], 5000, dir).unwrap();
    Outcome {
        pass: r.verdicts.iter().all(|v| v.holds),
        detail: r.verdicts.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
    }
}

struct Runs {
    weak_duality: Vec<(String, usize)>,
}

fn utility_ordering(dir: &Path, runs: &mut Runs) -> Outcome {
    let cfg = config("grid4x4_routing_congestion.toml");
    let deltas: Vec<CoefSpec> = [0.0, 5.0, 20.0, 50.0].iter().map(|&d| CoefSpec::Value(d)).collect();
    let sweep = sweep_delta(&cfg, &deltas, true, dir).unwrap();
    for e in &sweep.entries {
        runs.weak_duality.push((format!("routing delta {}", e.label), e.report.weak_duality_violations));
    }
    let c = sweep.constant_entries();
    let u: Vec<f64> = c.iter().map(|e| e.report.summed_utility).collect();
    let se: Vec<f64> = c.iter().map(|e| e.report.summed_utility_se).collect();
    let nondecreasing = u.windows(2).all(|w| w[1] >= w[0]);
    let diff = (u[1] - u[0]).abs();
    let noise = 3.0 * se[0].hypot(se[1]);
    let converged = c.iter().all(|e| e.report.converged);
    Outcome {
        pass: nondecreasing && diff <= noise && converged,
        detail: format!(
            "utilities {u:.4?} se [{}]; |U(5) - U(0)| = {diff:.3e} vs 3 SE {noise:.3e}; all converged {converged}",
            sci(&se)
        ),
    }
}

fn power_suite() -> Outcome {
    let mut rng = seeded_rng(77, 3);
    let (b, n0) = (1e6, 0.1);
    let mut worst: f64 = 0.0;
    let mut cap_ok = true;
    let mut monotone = true;
    for _ in 0..1000 {
        let x = rng.random_range(40.0..100.0);
        let ell = rng.random_range(0.0..20.0);
        let nu = rng.random_range(0.0..5.0);
        let v = rng.random_range(0.01..10.0);
        let p_max = rng.random_range(0.5..5.0);
        let closed = power_optimal_quadratic(x, ell, nu, v, b, n0, p_max);
        let generic = power_optimal_generic(PowerCost::Quadratic { v }, x, ell, nu, b, n0, p_max);
        worst = worst.max((closed - generic).abs());
        let free = power_optimal_quadratic(x, ell, nu, v, b, n0, f64::INFINITY);
        cap_ok &= free <= power_cap_bound(ell, nu, v, b) * (1.0 + 1e-12) + 1e-15;
        let dx = rng.random_range(0.0..20.0);
        monotone &= power_optimal_quadratic(x + dx, ell, nu, v, b, n0, p_max) <= closed + 1e-12;
    }
    Outcome {
        pass: worst <= 1e-9 && cap_ok && monotone,
        detail: format!("largest |closed - root finder| {worst:.2e} W, cap respected {cap_ok}, nonincreasing in x {monotone}"),
    }
}

struct CrossLayer {
    rates_at_20: Vec<f64>,
    utility_at_20: f64,
}

fn power_ordering(dir: &Path, runs: &mut Runs) -> (Outcome, CrossLayer) {
    let cfg = config("grid4x4_cross_layer.toml");
    let deltas: Vec<CoefSpec> = [0.0, 5.0, 20.0, 50.0].iter().map(|&d| CoefSpec::Value(d)).collect();
    let sweep = sweep_delta(&cfg, &deltas, true, dir).unwrap();
    for e in &sweep.entries {
        runs.weak_duality.push((format!("cross-layer delta {}", e.label), e.report.weak_duality_violations));
    }
    let c = sweep.constant_entries();
    let p: Vec<f64> = c.iter().map(|e| e.report.mean_link_power).collect();
    let se: Vec<f64> = c.iter().map(|e| e.report.mean_link_power_se).collect();
    let decreasing = p.windows(2).all(|w| w[1] < w[0]);
    let below = p.iter().all(|&x| x < 2.0);
    let at20 = c.iter().find(|e| e.delta == Some(20.0)).unwrap();
    let iters: Vec<usize> = c.iter().map(|e| e.report.iterations).collect();
    (
        Outcome {
            pass: decreasing && below,
            detail: format!("mean link power {p:.4?} W (se [{}]) for delta [0, 5, 20, 50]; iterations {iters:?}", sci(&se)),
        },
        CrossLayer {
            rates_at_20: at20.report.rates.clone(),
            utility_at_20: at20.report.summed_utility,
        },
    )
}

fn cross_layer_gain(dir: &Path, runs: &mut Runs, cl: &CrossLayer) -> Outcome {
    let mut cfg = config("grid4x4_cross_layer.toml");
    cfg.problem.power_control = false;
    cfg.problem.scheduling = false;
    let base = run_into(&cfg, dir).unwrap();
    runs.weak_duality.push(("routing-only delta 20".into(), base.report.weak_duality_violations));
    let dominated = cl.rates_at_20.iter().zip(&base.report.rates).filter(|(a, b)| a >= b).count();
    Outcome {
        pass: cl.utility_at_20 >= base.report.summed_utility,
        detail: format!(
            "summed utility {:.4} with power control and scheduling vs {:.4} routing only; {dominated}/{} flows at least as fast",
            cl.utility_at_20,
            base.report.summed_utility,
            cl.rates_at_20.len()
        ),
    }
}

/// Weak duality over every run plus the remaining bundled configs, and the
/// oracle gaps. Returns the time spent on the extra bundled runs, which only
/// feed the weak-duality tally.
fn zero_gap(dir: &Path, runs: &mut Runs) -> (Outcome, Duration) {
    let t = Instant::now();
    for name in ["small_p1.toml", "tv_beta.toml"] {
        let r = run_into(&config(name), &dir.join(name)).unwrap();
        runs.weak_duality.push((name.to_string(), r.report.weak_duality_violations));
    }
    let shared = t.elapsed();
    for name in ["oracle_single_link.toml", "oracle_two_link.toml", "oracle_lambda_max.toml"] {
        let r = run_into(&config(name), &dir.join(name)).unwrap();
        runs.weak_duality.push((name.to_string(), r.report.weak_duality_violations));
    }
    let single = oracle_small_instance(&config("oracle_single_link.toml"), &dir.join("o1")).unwrap();
    let two = oracle_small_instance(&config("oracle_two_link.toml"), &dir.join("o2")).unwrap();
    let violations: usize = runs.weak_duality.iter().map(|r| r.1).sum();
    let offenders: Vec<&String> = runs.weak_duality.iter().filter(|r| r.1 > 0).map(|r| &r.0).collect();
    let outcome = Outcome {
        pass: violations == 0 && single.gap <= 0.02 && two.gap <= 0.03,
        detail: format!(
            "weak duality violations {violations} over {} runs {offenders:?}; oracle gap single link {:.3}%, two links {:.3}%; \
             small_p1 and tv_beta runs took {:.1} s (not counted)",
            runs.weak_duality.len(),
            100.0 * single.gap,
            100.0 * two.gap,
            shared.as_secs_f64()
        ),
    };
    (outcome, shared)
}

fn enumeration() -> Outcome {
    let mut rng = seeded_rng(99, 5);
    let mut mismatches = 0;
    for _ in 0..50 {
        let n: usize = rng.random_range(1..=12);
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.35) {
                    pairs.push((a, b));
                }
            }
        }
        let g = ConflictGraph::from_pairs(n, &pairs);
        let mut brute: Vec<Vec<usize>> = (1u32..1 << n)
            .map(|mask| (0..n).filter(|&e| mask >> e & 1 == 1).collect::<Vec<_>>())
            .filter(|s| g.is_independent(s))
            .filter(|s| {
                (0..n).filter(|v| !s.contains(v)).all(|v| {
                    let mut t = s.clone();
                    t.push(v);
                    !g.is_independent(&t)
                })
            })
            .collect();
        brute.sort();
        let mut got: Vec<Vec<usize>> = enumerate_maximal_independent_sets(&g, 1 << 12)
            .unwrap()
            .sets()
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort_unstable();
                s
            })
            .collect();
        got.sort();
        mismatches += usize::from(got != brute);
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!("{mismatches} of 50 random conflict graphs differ from 2^n enumeration"),
    }
}

fn convergence_mechanics(dir: &Path, runs: &mut Runs) -> Outcome {
    let steps_ok = (1..1000).all(|eta| step_size(eta, 40.0).unwrap() == 40.0 / eta as f64);
    let mut rng = seeded_rng(5, 9);
    let mut criterion_ok = true;
    for _ in 0..2000 {
        let len = rng.random_range(1..30);
        let trace: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..3e-4)).collect();
        let expected = len >= 8 && trace[len - 8..].iter().sum::<f64>() < 1e-3;
        criterion_ok &= converged(&trace, 8, 1e-3) == expected;
    }
    let sweep = sweep_t(&config("grid4x4_routing_congestion.toml"), &[0.5, 1.0, 2.0], StepRule::Proportional, dir).unwrap();
    for r in &sweep.rows {
        runs.weak_duality.push((format!("sweep T = {}", r.t_end), r.report.weak_duality_violations));
    }
    let iters: Vec<usize> = sweep.rows.iter().map(|r| r.report.iterations).collect();
    let nondecreasing = iters.windows(2).all(|w| w[1] >= w[0]);
    Outcome {
        pass: steps_ok && criterion_ok && nondecreasing,
        detail: format!("step A'/eta {steps_ok}, window criterion {criterion_ok}, iterations for T [0.5, 1, 2]: {iters:?}"),
    }
}

fn time_varying_utilities(dir: &Path, runs: &mut Runs) -> Outcome {
    let r = run_time_varying_utilities(&config("tv_utilities.toml"), dir).unwrap();
    runs.weak_duality.push(("tv utilities".into(), r.report.weak_duality_violations));
    let first: Vec<f64> = r.curves.iter().map(|c| c[0]).collect();
    let last: Vec<f64> = r.curves.iter().map(|c| *c.last().unwrap()).collect();
    Outcome {
        pass: r.verdicts.iter().all(|v| v.holds) && r.report.converged,
        detail: format!(
            "{}; rates at t = 1 {first:.3?}, at t = 2 {last:.3?}",
            r.verdicts.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        ),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn report(k: usize, budget: Duration, elapsed: Duration, outcome: Outcome, failures: &mut usize) {
    let pass = outcome.pass && elapsed < budget;
    *failures += usize::from(!pass);
    println!(
        "criterion {k}: {} ({:.1} s, budget {} s) {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        outcome.detail
    );
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |name: &str| -> PathBuf { tmp.path().join(name) };
    let mut runs = Runs { weak_duality: Vec::new() };
    let mut failures = 0;
    let secs = Duration::from_secs;
    let min = |m: u64| secs(60 * m);

    let (o, e) = timed(discretization_exactness);
    report(1, secs(30), e, o, &mut failures);
    let (o, e) = timed(|| convex_order(&dir("c2")));
    report(2, min(1), e, o, &mut failures);
    let (o, e) = timed(|| utility_ordering(&dir("c3"), &mut runs));
    report(3, min(10), e, o, &mut failures);
    let (o, e) = timed(power_suite);
    report(4, secs(5), e, o, &mut failures);
    let ((o, cl), e5) = timed(|| power_ordering(&dir("c5"), &mut runs));
    report(5, min(20), e5, o, &mut failures);
    // the cross-layer side of the comparison is the delta = 20 run above
    let (o, e) = timed(|| cross_layer_gain(&dir("c6"), &mut runs, &cl));
    report(6, min(20), e + e5, o, &mut failures);
    let (c9, e9) = timed(|| convergence_mechanics(&dir("c9"), &mut runs));
    let (c10, e10) = timed(|| time_varying_utilities(&dir("c10"), &mut runs));
    let ((o, shared), e) = timed(|| zero_gap(&dir("c7"), &mut runs));
    report(7, min(2), e - shared, o, &mut failures);
    let (o, e) = timed(enumeration);
    report(8, secs(10), e, o, &mut failures);
    report(9, min(15), e9, c9, &mut failures);
    report(10, min(5), e10, c10, &mut failures);
    println!("{} of 10 criteria passed", 10 - failures);
}
