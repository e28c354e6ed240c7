use serde::{Deserialize, Serialize};

use super::coefficient::CoefficientFn;
use super::grid::TimeGrid;
use super::linear::{Forcing, LinearSde, StepCoefficients};
use crate::error::{Error, Result};
use crate::rng::{NormalStream, StreamKey};

/// Inphase and quadrature scalar states `dX = A(t) X dt + B(t) dW`, observed
/// as `I = c_i X_I`, `Q = c_q X_Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StfChannelModel {
    pub a_i: CoefficientFn,
    pub a_q: CoefficientFn,
    pub b_i: CoefficientFn,
    pub b_q: CoefficientFn,
    pub c_i: f64,
    pub c_q: f64,
    pub x_i0: f64,
    pub x_q0: f64,
}

impl StfChannelModel {
    pub fn validate(&self) -> Result<()> {
        for f in [&self.a_i, &self.a_q, &self.b_i, &self.b_q] {
            f.validate()?;
        }
        if [self.c_i, self.c_q, self.x_i0, self.x_q0].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("gains and initial states must be finite".into()));
        }
        Ok(())
    }

    pub fn step_coefficients(&self, grid: &TimeGrid, quad_substeps: usize) -> Result<(StepCoefficients, StepCoefficients)> {
        self.validate()?;
        let comp = |a, b| {
            LinearSde {
                rate: a,
                rate_sign: -1.0,
                forcing: Forcing::Zero,
                diffusion: b,
                require_positive_rate: false,
            }
            .step_coefficients(grid, quad_substeps)
        };
        Ok((comp(&self.a_i, &self.b_i)?, comp(&self.a_q, &self.b_q)?))
    }
}

/// Stream key of the quadrature component paired with `key`.
pub(crate) fn quadrature_key(key: StreamKey) -> StreamKey {
    StreamKey {
        channel: key.channel ^ (1 << 63),
        ..key
    }
}

/// Observed `(I, Q)` sequences, each of length `n + 1`.
pub fn sample_stf_with(
    model: &StfChannelModel,
    coeffs: &(StepCoefficients, StepCoefficients),
    key: StreamKey,
) -> (Vec<f64>, Vec<f64>) {
    let run = |x0: f64, c: &StepCoefficients, gain: f64, key| {
        let mut rng = NormalStream::new(key);
        let mut x = x0;
        let mut out = Vec::with_capacity(c.len() + 1);
        out.push(gain * x);
        for b in 0..c.len() {
            let xi = rng.next_normal();
            x = c.rho[b] * x + c.sigma[b] * xi;
            out.push(gain * x);
        }
        out
    };
    (
        run(model.x_i0, &coeffs.0, model.c_i, key),
        run(model.x_q0, &coeffs.1, model.c_q, quadrature_key(key)),
    )
}

/// Squared-magnitude gain `I^2 + Q^2`.
#[inline]
pub fn attenuation_stf(i: f64, q: f64) -> f64 {
    i * i + q * q
}
