use statrs::distribution::{ContinuousCDF, Normal};
use stochnum::channel::{
    attenuation_ltf, ltf_mean_variance, ltf_step_coefficients, sample_ltf_into, sample_stf_with, CoefficientFn,
    LtfChannelModel, StfChannelModel, TimeGrid,
};
use stochnum::network::capacity_orthogonal;
use stochnum::rng::StreamKey;

/// Kolmogorov distribution tail `P(sqrt(n) D > x)`.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let x = d * (n as f64).sqrt();
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        p += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * x * x).exp();
    }
    p.clamp(0.0, 1.0)
}

fn ks_statistic(mut xs: Vec<f64>, dist: &Normal) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = dist.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn end_values(model: &LtfChannelModel, grid: &TimeGrid, paths: usize, stream: u64) -> Vec<f64> {
    let c = ltf_step_coefficients(model, grid, 64).unwrap();
    let mut x = vec![0.0; grid.n() + 1];
    (0..paths)
        .map(|m| {
            sample_ltf_into(model.x0, &c, StreamKey::new(stream, m as u64, 0), &mut x);
            x[grid.n()]
        })
        .collect()
}

#[test]
fn one_large_step_is_exact_in_distribution() {
    // a single step of length 0.03 against the analytic transition law
    let (beta, gamma, delta, x0) = (100.0, 70.0, 25.0, 62.0);
    let h = 0.03;
    let model = LtfChannelModel::constant(beta, gamma, delta, x0).unwrap();
    let grid = TimeGrid::new(0.0, h, 1).unwrap();
    let xs = end_values(&model, &grid, 20_000, 5);
    let mean = gamma + (x0 - gamma) * (-beta * h).exp();
    let var = delta * delta * (1.0 - (-2.0 * beta * h).exp()) / (2.0 * beta);
    let d = ks_statistic(xs, &Normal::new(mean, var.sqrt()).unwrap());
    assert!(ks_p_value(d, 20_000) > 0.01, "KS D = {d}");
}

#[test]
fn ks_p_value_matches_reference_points() {
    // sqrt(n) D = 1.36 is the textbook 5% point, 1.63 the 1% point
    let n = 10_000;
    assert!((ks_p_value(1.36 / 100.0, n) - 0.05).abs() < 2e-3);
    assert!((ks_p_value(1.63 / 100.0, n) - 0.01).abs() < 1e-3);
}

/// Mean and variance ODEs of the OU loss integrated with classical RK4.
fn rk4_moments(beta: f64, gamma: &CoefficientFn, delta: f64, x0: f64, t_end: f64, steps: usize) -> (f64, f64) {
    let h = t_end / steps as f64;
    let f = |t: f64, m: f64, v: f64| (beta * (gamma.eval(t) - m), -2.0 * beta * v + delta * delta);
    let (mut m, mut v) = (x0, 0.0);
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = f(t, m, v);
        let k2 = f(t + h / 2.0, m + h / 2.0 * k1.0, v + h / 2.0 * k1.1);
        let k3 = f(t + h / 2.0, m + h / 2.0 * k2.0, v + h / 2.0 * k2.1);
        let k4 = f(t + h, m + h * k3.0, v + h * k3.1);
        m += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (m, v)
}

#[test]
fn time_varying_mean_matches_ode_solution() {
    let gamma = CoefficientFn::damped_oscillation(70.0, 0.0, 1.0);
    let model = LtfChannelModel::new(CoefficientFn::constant(100.0), gamma.clone(), CoefficientFn::constant(20.0), 70.0).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 500).unwrap();
    let (mean, var) = ltf_mean_variance(&model, &grid).unwrap();
    let (m, v) = rk4_moments(100.0, &gamma, 20.0, 70.0, 1.0, 200_000);
    assert!((mean[500] - m).abs() < 1e-8, "{} vs {m}", mean[500]);
    assert!((var[500] - v).abs() < 1e-8, "{} vs {v}", var[500]);
    let (m_half, _) = rk4_moments(100.0, &gamma, 20.0, 70.0, 0.5, 100_000);
    assert!((mean[250] - m_half).abs() < 1e-8);
}

#[test]
fn piecewise_beta_mean_matches_ode_solution() {
    // breakpoints inside steps are handled by splitting
    let beta = CoefficientFn::piecewise(vec![0.3337, 0.6671], vec![10.0, 100.0, 500.0]).unwrap();
    let model = LtfChannelModel::new(beta.clone(), CoefficientFn::constant(70.0), CoefficientFn::constant(0.0), 60.0).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 7).unwrap();
    let (mean, _) = ltf_mean_variance(&model, &grid).unwrap();
    let t_end = 1.0;
    // closed form: X - 70 decays by exp(-∫beta)
    let integral = 10.0 * 0.3337 + 100.0 * (0.6671 - 0.3337) + 500.0 * (t_end - 0.6671);
    let expected = 70.0 + (60.0 - 70.0) * f64::exp(-integral);
    assert!((mean[7] - expected).abs() < 1e-12);
}

#[test]
fn stf_moments_match_analytic_values() {
    let (a, b, x0) = (-2.0, 0.5, 0.3);
    let model = StfChannelModel {
        a_i: CoefficientFn::constant(a),
        a_q: CoefficientFn::constant(a),
        b_i: CoefficientFn::constant(b),
        b_q: CoefficientFn::constant(b),
        c_i: 1.0,
        c_q: 1.0,
        x_i0: x0,
        x_q0: x0,
    };
    let grid = TimeGrid::new(0.0, 1.0, 50).unwrap();
    let coeffs = model.step_coefficients(&grid, 16).unwrap();
    let paths = 20_000;
    let ends: Vec<f64> = (0..paths)
        .map(|m| sample_stf_with(&model, &coeffs, StreamKey::new(9, m, 0)).0[50])
        .collect();
    let n = paths as f64;
    let mean = ends.iter().sum::<f64>() / n;
    let var = ends.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let exact_mean = x0 * f64::exp(a);
    let exact_var = b * b * (f64::exp(2.0 * a) - 1.0) / (2.0 * a);
    assert!((mean - exact_mean).abs() < 4.0 * (exact_var / n).sqrt());
    assert!((var - exact_var).abs() < 4.0 * exact_var * (2.0 / (n - 1.0)).sqrt());
}

fn capacity_integrals(delta: f64, paths: usize, n: usize) -> Vec<f64> {
    let model = LtfChannelModel::constant(100.0, 70.0, delta, 70.0).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, n).unwrap();
    let c = ltf_step_coefficients(&model, &grid, 64).unwrap();
    let mut x = vec![0.0; n + 1];
    (0..paths)
        .map(|m| {
            sample_ltf_into(70.0, &c, StreamKey::new(3, m as u64, 0), &mut x);
            x[..n].iter().map(|&xb| capacity_orthogonal(1e6, attenuation_ltf(xb), 2.0, 0.1)).sum::<f64>() * grid.dt()
        })
        .collect()
}

fn se(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
}

#[test]
fn standard_error_shrinks_as_one_over_root_m() {
    let small = se(&capacity_integrals(25.0, 400, 100));
    let large = se(&capacity_integrals(25.0, 6400, 100));
    let ratio = small / large;
    assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
}

#[test]
fn riemann_sums_converge_under_refinement() {
    // deterministic time-varying path: left sums converge at first order
    let gamma = CoefficientFn::damped_oscillation(70.0, 0.0, 1.0);
    let model = LtfChannelModel::new(CoefficientFn::constant(100.0), gamma, CoefficientFn::constant(0.0), 70.0).unwrap();
    let integral = |n: usize| {
        let grid = TimeGrid::new(0.0, 1.0, n).unwrap();
        let (mean, _) = ltf_mean_variance(&model, &grid).unwrap();
        mean[..n].iter().map(|&x| capacity_orthogonal(1e6, attenuation_ltf(x), 2.0, 0.1)).sum::<f64>() * grid.dt()
    };
    let values: Vec<f64> = [250, 500, 1000, 2000].iter().map(|&n| integral(n)).collect();
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in diffs.windows(2) {
        let r = w[0] / w[1];
        assert!((1.6..2.4).contains(&r), "refinement ratio {r}, diffs {diffs:?}");
    }
}
