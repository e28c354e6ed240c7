use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::attenuation_ltf;
use crate::network::capacity_orthogonal;

/// Convex per-link power cost `J(P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PowerCost {
    Zero,
    /// `v P^2`
    Quadratic { v: f64 },
}

impl PowerCost {
    #[inline]
    pub fn value(&self, p: f64) -> f64 {
        match *self {
            PowerCost::Zero => 0.0,
            PowerCost::Quadratic { v } => v * p * p,
        }
    }

    #[inline]
    pub fn derivative(&self, p: f64) -> f64 {
        match *self {
            PowerCost::Zero => 0.0,
            PowerCost::Quadratic { v } => 2.0 * v * p,
        }
    }
}

/// Link terms entering the per-link power maximization
/// `max_P  -J(P) + ell C(P) - nu P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPrices {
    pub ell: f64,
    pub nu: f64,
}

/// Positive root of the first-order condition for `J = v P^2`, clipped to
/// `[lo, hi]`; `gain` is the linear attenuation.
#[inline]
pub fn quadratic_root_clipped(gain: f64, prices: PowerPrices, v: f64, bandwidth: f64, noise: f64, lo: f64, hi: f64) -> f64 {
    if gain <= 0.0 || prices.ell <= 0.0 {
        return lo;
    }
    let k = 2.0 * v;
    let u = noise / gain + prices.nu / k;
    let w = prices.nu * noise / (k * gain) - prices.ell * bandwidth / (k * LN_2);
    let disc = (u * u - 4.0 * w).max(0.0);
    let p = -2.0 * w / (u + disc.sqrt());
    p.clamp(lo, hi)
}

/// Closed-form optimal power for a quadratic cost at loss `x` dB.
pub fn power_optimal_quadratic(x: f64, ell: f64, nu: f64, v: f64, bandwidth: f64, noise: f64, p_max: f64) -> f64 {
    quadratic_root_clipped(attenuation_ltf(x), PowerPrices { ell, nu }, v, bandwidth, noise, 0.0, p_max)
}

/// Supremum of the optimal quadratic-cost power over all channel states.
pub fn power_cap_bound(ell: f64, nu: f64, v: f64, bandwidth: f64) -> f64 {
    let h = nu / (2.0 * v);
    0.5 * ((h * h + 4.0 * ell * bandwidth / (2.0 * v * LN_2)).sqrt() - h)
}

/// Optimal power for any convex cost, by bisection on the sign of the
/// derivative of the (concave) objective over `[lo, hi]`.
pub fn power_optimal_generic_on(
    cost: PowerCost,
    gain: f64,
    prices: PowerPrices,
    bandwidth: f64,
    noise: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let slope = |p: f64| -cost.derivative(p) + prices.ell * bandwidth * gain / (LN_2 * (noise + gain * p)) - prices.nu;
    if slope(lo) <= 0.0 {
        return lo;
    }
    if slope(hi) >= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if slope(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn power_optimal_generic(
    cost: PowerCost,
    x: f64,
    ell: f64,
    nu: f64,
    bandwidth: f64,
    noise: f64,
    p_max: f64,
) -> f64 {
    power_optimal_generic_on(cost, attenuation_ltf(x), PowerPrices { ell, nu }, bandwidth, noise, 0.0, p_max)
}

/// Optimal power on `[lo, hi]` for any supported cost.
#[inline]
pub fn power_optimal(cost: PowerCost, gain: f64, prices: PowerPrices, bandwidth: f64, noise: f64, lo: f64, hi: f64) -> f64 {
    match cost {
        PowerCost::Quadratic { v } if v > 0.0 => quadratic_root_clipped(gain, prices, v, bandwidth, noise, lo, hi),
        _ => power_optimal_generic_on(cost, gain, prices, bandwidth, noise, lo, hi),
    }
}

/// Per-link objective `-J(P) + ell C(P) - nu P`.
#[inline]
pub fn link_weight(cost: PowerCost, gain: f64, p: f64, prices: PowerPrices, bandwidth: f64, noise: f64) -> f64 {
    -cost.value(p) + prices.ell * capacity_orthogonal(bandwidth, gain, p, noise) - prices.nu * p
}
