use std::path::Path;

use proptest::prelude::*;
use stochnum::harness::{run_into, sweep_delta, CoefSpec, RunConfig};
use stochnum::layers::{congestion_optimal_rate, Utility};
use stochnum::solver::{converged, solve_dual, step_size};

proptest! {
    #[test]
    fn criterion_fires_exactly_on_the_window_sum(
        changes in prop::collection::vec(0.0..4e-4f64, 1..30),
    ) {
        let expected = changes.len() >= 8 && changes[changes.len() - 8..].iter().sum::<f64>() < 1e-3;
        prop_assert_eq!(converged(&changes, 8, 1e-3), expected);
    }

    #[test]
    fn step_is_scale_over_iteration(eta in 1usize..1_000_000, a in 0.01..100.0f64) {
        prop_assert_eq!(step_size(eta, a).unwrap(), a / eta as f64);
    }
}

#[test]
fn criterion_on_hand_traces() {
    let mut trace = vec![1.0; 5];
    trace.extend([1.2e-4; 8]);
    assert!(converged(&trace, 8, 1e-3));
    // the sum 8 * 1.25e-4 equals the tolerance: not strictly below
    let at_tol = vec![1.25e-4; 8];
    assert!(!converged(&at_tol, 8, 1e-3));
    assert!(!converged(&[0.0; 7], 8, 1e-3));
    assert!(step_size(0, 1.0).is_err());
}

/// Two links in series with a noisy channel; small enough to run quickly.
fn small_config(extra: &str) -> RunConfig {
    let text = format!(
        r#"
[topology]
edges = [[0, 1], [1, 2], [2, 1], [1, 0]]
flows = [[0, 2], [2, 0]]

[channel]
delta = 20.0

[time]
n = 40

[mc]
M = 30

[problem]
R_max = 1.0

[solver]
A_prime = 2.0
max_iters = 400000
trace_stride = 5000
{extra}
"#
    );
    RunConfig::parse(&text).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn reruns_are_byte_identical_and_svg_leaves_csv_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config("");
    let a = run_into(&cfg, &tmp.path().join("a")).unwrap();
    run_into(&cfg, &tmp.path().join("b")).unwrap();
    let mut with_svg = cfg.clone();
    with_svg.outputs.emit_svg = true;
    let c = run_into(&with_svg, &tmp.path().join("c")).unwrap();
    assert!(a.report.converged);
    for name in ["trace.csv", "rates.csv", "links.csv", "rate_profiles.csv", "report.json"] {
        assert_eq!(read(&tmp.path().join("a"), name), read(&tmp.path().join("b"), name), "{name}");
    }
    for name in ["trace.csv", "rates.csv", "links.csv", "rate_profiles.csv"] {
        assert_eq!(read(&tmp.path().join("a"), name), read(&tmp.path().join("c"), name), "{name}");
    }
    assert!(c.report.files.iter().any(|f| f.ends_with(".svg")));
    assert_eq!(a.report.files.len() + 3, c.report.files.len());
}

#[test]
fn weak_duality_holds_along_the_run() {
    let cfg = small_config("");
    let out = solve_dual(&cfg.build_spec().unwrap()).unwrap();
    assert_eq!(out.trace.weak_duality_violations, 0);
    assert!(out.best_dual + 3.0 * out.best_dual_se >= out.primal.objective);
    for e in &out.trace.entries {
        assert!(e.dual + 3.0 * e.dual_se >= out.primal.objective, "eta {}", e.eta);
    }
}

#[test]
fn repeated_delta_gives_identical_reports_under_crn() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config("");
    let sweep = sweep_delta(&cfg, &[CoefSpec::Value(10.0), CoefSpec::Value(10.0)], true, tmp.path()).unwrap();
    let (a, b) = (&sweep.entries[0].report, &sweep.entries[1].report);
    assert_eq!(a.rates, b.rates);
    assert_eq!(a.dual, b.dual);
    assert_eq!(a.iterations, b.iterations);
    assert!(sweep_delta(&cfg, &[CoefSpec::Value(10.0)], true, tmp.path()).is_err());
}

#[test]
fn independent_streams_differ_without_crn() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config("");
    let sweep = sweep_delta(&cfg, &[CoefSpec::Value(10.0), CoefSpec::Value(10.0)], false, tmp.path()).unwrap();
    assert_ne!(sweep.entries[0].report.dual, sweep.entries[1].report.dual);
}

#[test]
fn max_iters_is_reported() {
    let cfg = small_config("").clone();
    let mut capped = cfg;
    capped.solver.max_iters = 10;
    let out = solve_dual(&capped.build_spec().unwrap()).unwrap();
    assert_eq!(out.iterations, 10);
    assert_eq!(out.status, stochnum::solver::Status::MaxIters);
}

#[test]
fn time_divided_rates_follow_the_closed_form() {
    let u = Utility::LogOverTime;
    assert_eq!(congestion_optimal_rate(&u, 1.0, 1.0, 10.0), 1.0);
    assert_eq!(congestion_optimal_rate(&u, 1.0, 2.0, 10.0), 0.5);
    // clipped at 0.4 until t = 1 / (mu lambda_max) = 2.5
    for t in [1.0, 1.5, 2.0, 2.49] {
        assert_eq!(congestion_optimal_rate(&u, 1.0, t, 0.4), 0.4);
    }
    assert!(congestion_optimal_rate(&u, 1.0, 3.0, 0.4) < 0.4);
    assert!((congestion_optimal_rate(&u, 1.0, 3.0, 0.4) - 1.0 / 3.0).abs() < 1e-15);
}
