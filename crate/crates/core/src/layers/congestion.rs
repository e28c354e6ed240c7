use super::concave_max::scalar_argmax;
use super::utility::Utility;

/// Lower guard on source rates; log utilities have a pole at zero.
pub const RATE_FLOOR: f64 = 1e-9;

/// Maximizer of `U(lambda, t) - mu lambda` over `[RATE_FLOOR, lambda_max]`.
pub fn congestion_optimal_rate(u: &Utility, mu: f64, t: f64, lambda_max: f64) -> f64 {
    let lo = RATE_FLOOR.min(lambda_max);
    let hi = lambda_max;
    if hi <= lo {
        return hi;
    }
    if mu <= 0.0 && u.is_concave() {
        return hi;
    }
    let unclipped = match *u {
        Utility::Log { weight } => weight / mu,
        Utility::AlphaFair { alpha, weight } => (weight / mu).powf(1.0 / alpha),
        Utility::LogOverTime => 1.0 / (t * mu),
        Utility::Sigmoid { .. } => return scalar_argmax(|l| u.value(l, t) - mu * l, lo, hi),
    };
    unclipped.clamp(lo, hi)
}
