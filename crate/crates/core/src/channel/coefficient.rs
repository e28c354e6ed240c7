use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic time-varying coefficient of a channel SDE.
///
/// Shapes that depend on the operating horizon carry their own `origin` and
/// `length` so that evaluation is a pure function of absolute time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientFn {
    Constant {
        value: f64,
    },
    /// `values[k]` holds on `[breakpoints[k-1], breakpoints[k])`; the first
    /// value extends to `-inf` and the last to `+inf`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// `base * (1 + amplitude * exp(-decay * u) * sin(frequency * u))` with
    /// `u = (t - origin) / length`: a path-loss level oscillating around
    /// `base` with a decaying envelope.
    DampedOscillation {
        base: f64,
        amplitude: f64,
        decay: f64,
        frequency: f64,
        origin: f64,
        length: f64,
    },
    /// `offset + amplitude * sin(frequency * (t - origin) / length)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        origin: f64,
        length: f64,
    },
}

impl CoefficientFn {
    pub fn constant(value: f64) -> Self {
        CoefficientFn::Constant { value }
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let f = CoefficientFn::PiecewiseConstant {
            breakpoints,
            values,
        };
        f.validate()?;
        Ok(f)
    }

    /// Path-loss level used by the grid experiments: 15% oscillation at
    /// five periods over the horizon, envelope decaying as `exp(-2u)`.
    pub fn damped_oscillation(base: f64, origin: f64, length: f64) -> Self {
        CoefficientFn::DampedOscillation {
            base,
            amplitude: 0.15,
            decay: 2.0,
            frequency: 10.0 * PI,
            origin,
            length,
        }
    }

    pub fn sinusoid(offset: f64, amplitude: f64, frequency: f64, origin: f64, length: f64) -> Self {
        CoefficientFn::Sinusoid {
            offset,
            amplitude,
            frequency,
            origin,
            length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoefficientFn::Constant { value } => finite(*value, "value"),
            CoefficientFn::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidCoefficient(format!(
                        "piecewise function needs {} values for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        values.len()
                    )));
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidCoefficient(
                        "piecewise breakpoints must be strictly increasing".into(),
                    ));
                }
                breakpoints
                    .iter()
                    .chain(values)
                    .try_for_each(|v| finite(*v, "piecewise entry"))
            }
            CoefficientFn::DampedOscillation {
                base,
                amplitude,
                decay,
                frequency,
                origin,
                length,
            } => {
                for (v, name) in [
                    (base, "base"),
                    (amplitude, "amplitude"),
                    (decay, "decay"),
                    (frequency, "frequency"),
                    (origin, "origin"),
                ] {
                    finite(*v, name)?;
                }
                positive_length(*length)
            }
            CoefficientFn::Sinusoid {
                offset,
                amplitude,
                frequency,
                origin,
                length,
            } => {
                for (v, name) in [
                    (offset, "offset"),
                    (amplitude, "amplitude"),
                    (frequency, "frequency"),
                    (origin, "origin"),
                ] {
                    finite(*v, name)?;
                }
                positive_length(*length)
            }
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoefficientFn::Constant { value } => *value,
            CoefficientFn::PiecewiseConstant {
                breakpoints,
                values,
            } => values[breakpoints.partition_point(|&b| b <= t)],
            CoefficientFn::DampedOscillation {
                base,
                amplitude,
                decay,
                frequency,
                origin,
                length,
            } => {
                let u = (t - origin) / length;
                base * (1.0 + amplitude * (-decay * u).exp() * (frequency * u).sin())
            }
            CoefficientFn::Sinusoid {
                offset,
                amplitude,
                frequency,
                origin,
                length,
            } => offset + amplitude * (frequency * (t - origin) / length).sin(),
        }
    }

    /// The value when the function is constant on the open interval `(a, b)`.
    pub fn constant_on(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            CoefficientFn::Constant { value } => Some(*value),
            CoefficientFn::PiecewiseConstant { breakpoints, .. } => {
                let interior = breakpoints.iter().any(|&p| p > a && p < b);
                (!interior).then(|| self.eval(0.5 * (a + b)))
            }
            CoefficientFn::DampedOscillation {
                base, amplitude, ..
            } => (*amplitude == 0.0 || *base == 0.0).then_some(*base),
            CoefficientFn::Sinusoid {
                offset, amplitude, ..
            } => (*amplitude == 0.0).then_some(*offset),
        }
    }

    /// Discontinuities strictly inside `(a, b)`.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            CoefficientFn::PiecewiseConstant { breakpoints, .. } => breakpoints
                .iter()
                .copied()
                .filter(|&p| p > a && p < b)
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            CoefficientFn::Constant { value } => *value == 0.0,
            CoefficientFn::PiecewiseConstant { values, .. } => values.iter().all(|v| *v == 0.0),
            CoefficientFn::DampedOscillation { base, .. } => *base == 0.0,
            CoefficientFn::Sinusoid {
                offset, amplitude, ..
            } => *offset == 0.0 && *amplitude == 0.0,
        }
    }
}

fn finite(v: f64, name: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidCoefficient(format!("{name} must be finite")))
    }
}

fn positive_length(length: f64) -> Result<()> {
    if length.is_finite() && length > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidCoefficient("length must be positive".into()))
    }
}
