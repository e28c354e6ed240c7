use serde::{Deserialize, Serialize};

use super::coefficient::CoefficientFn;
use super::grid::TimeGrid;
use super::linear::{Forcing, LinearSde, StepCoefficients};
use crate::error::{Error, Result};
use crate::rng::{NormalStream, StreamKey};

/// Mean-reverting power loss in dB: `dX = beta (gamma - X) dt + delta dW`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtfChannelModel {
    pub beta: CoefficientFn,
    pub gamma: CoefficientFn,
    pub delta: CoefficientFn,
    pub x0: f64,
}

impl LtfChannelModel {
    pub fn new(beta: CoefficientFn, gamma: CoefficientFn, delta: CoefficientFn, x0: f64) -> Result<Self> {
        let m = Self {
            beta,
            gamma,
            delta,
            x0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn constant(beta: f64, gamma: f64, delta: f64, x0: f64) -> Result<Self> {
        Self::new(
            CoefficientFn::constant(beta),
            CoefficientFn::constant(gamma),
            CoefficientFn::constant(delta),
            x0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.beta.validate()?;
        self.gamma.validate()?;
        self.delta.validate()?;
        if !self.x0.is_finite() {
            return Err(Error::InvalidModel("initial power loss must be finite".into()));
        }
        Ok(())
    }

    /// Checks that `∫ (beta |gamma| + delta^2)` over the grid horizon is finite
    /// and that `beta` stays positive on the grid nodes.
    pub fn check_on(&self, grid: &TimeGrid) -> Result<()> {
        let mut total = 0.0;
        for b in 0..=grid.n() {
            let t = grid.node(b);
            let beta = self.beta.eval(t);
            if !(beta > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "mean-reversion speed must be positive, got {beta} at t = {t}"
                )));
            }
            let d = self.delta.eval(t);
            total += beta * self.gamma.eval(t).abs() + d * d;
        }
        if !total.is_finite() {
            return Err(Error::InvalidModel("coefficients are not integrable on the horizon".into()));
        }
        Ok(())
    }

    fn sde(&self) -> LinearSde<'_> {
        LinearSde {
            rate: &self.beta,
            rate_sign: 1.0,
            forcing: Forcing::Product(&self.beta, &self.gamma),
            diffusion: &self.delta,
            require_positive_rate: true,
        }
    }
}

/// Per-step `rho`, `zeta`, `sigma` of the exact discretization.
pub fn ltf_step_coefficients(
    model: &LtfChannelModel,
    grid: &TimeGrid,
    quad_substeps: usize,
) -> Result<StepCoefficients> {
    model.check_on(grid)?;
    let c = model.sde().step_coefficients(grid, quad_substeps)?;
    if c.zeta.iter().chain(&c.sigma).any(|v| !v.is_finite()) {
        return Err(Error::InvalidModel("step coefficients are not finite".into()));
    }
    Ok(c)
}

/// Analytic mean and variance of `X(tau_b)` at every node.
pub fn ltf_mean_variance(model: &LtfChannelModel, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let c = ltf_step_coefficients(model, grid, 256)?;
    Ok(c.propagate_moments(model.x0))
}

/// Linear gain of a loss of `x` dB.
#[inline]
pub fn attenuation_ltf(x: f64) -> f64 {
    10f64.powf(-x / 10.0)
}

/// Fills `out` (length `n + 1`) with one path. Step `b` consumes the normal
/// with counter `b - 1` of `key`.
pub fn sample_ltf_into(x0: f64, coeffs: &StepCoefficients, key: StreamKey, out: &mut [f64]) {
    debug_assert_eq!(out.len(), coeffs.len() + 1);
    out[0] = x0;
    let noiseless = coeffs.sigma.iter().all(|&s| s == 0.0);
    let mut rng = (!noiseless).then(|| NormalStream::new(key));
    for b in 0..coeffs.len() {
        let mut x = coeffs.rho[b] * out[b] + coeffs.zeta[b];
        if let Some(rng) = rng.as_mut() {
            let xi = rng.next_normal();
            x += coeffs.sigma[b] * xi;
        }
        out[b + 1] = x;
    }
}
