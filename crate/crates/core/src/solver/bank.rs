use rayon::prelude::*;

use super::spec::{ChannelModel, ProblemSpec};
use crate::channel::{attenuation_ltf, attenuation_stf, ltf_step_coefficients, sample_ltf_into, sample_stf_with, StepCoefficients};
use crate::error::Result;
use crate::rng::StreamKey;

/// Linear gains of every channel at the left Riemann nodes `b = 0..n-1` of
/// every Monte Carlo path, laid out `[path][b][channel]`.
#[derive(Debug, Clone)]
pub struct ChannelBank {
    paths: usize,
    steps: usize,
    channels: usize,
    gains: Vec<f64>,
}

enum Prepared {
    Ltf(f64, StepCoefficients),
    Stf(Box<(StepCoefficients, StepCoefficients)>),
}

impl ChannelBank {
    /// Samples all paths with keys `(stream, path, channel)`.
    pub fn sample(spec: &ProblemSpec, stream: u64) -> Result<Self> {
        let grid = &spec.grid;
        let q = spec.mc.quad_substeps;
        // models are usually shared by many channels; prepare each once
        let mut distinct: Vec<(&ChannelModel, Prepared)> = Vec::new();
        let mut which = Vec::with_capacity(spec.channels.len());
        for model in &spec.channels {
            let k = match distinct.iter().position(|(m, _)| *m == model) {
                Some(k) => k,
                None => {
                    let prepared = match model {
                        ChannelModel::Ltf(m) => Prepared::Ltf(m.x0, ltf_step_coefficients(m, grid, q)?),
                        ChannelModel::Stf(m) => Prepared::Stf(Box::new(m.step_coefficients(grid, q)?)),
                    };
                    distinct.push((model, prepared));
                    distinct.len() - 1
                }
            };
            which.push(k);
        }
        let (paths, steps, channels) = (spec.mc.paths, grid.n(), spec.channels.len());
        let mut gains = vec![0.0; paths * steps * channels];
        gains
            .par_chunks_mut(steps * channels)
            .enumerate()
            .for_each(|(m, chunk)| {
                let mut x = vec![0.0; steps + 1];
                for (c, &k) in which.iter().enumerate() {
                    let key = StreamKey::new(stream, m as u64, c as u64);
                    match (&distinct[k].0, &distinct[k].1) {
                        (_, Prepared::Ltf(x0, coeffs)) => {
                            sample_ltf_into(*x0, coeffs, key, &mut x);
                            for b in 0..steps {
                                chunk[b * channels + c] = attenuation_ltf(x[b]);
                            }
                        }
                        (ChannelModel::Stf(model), Prepared::Stf(coeffs)) => {
                            let (i, q) = sample_stf_with(model, coeffs, key);
                            for b in 0..steps {
                                chunk[b * channels + c] = attenuation_stf(i[b], q[b]);
                            }
                        }
                        _ => unreachable!("prepared kind follows the model"),
                    }
                }
            });
        Ok(Self {
            paths,
            steps,
            channels,
            gains,
        })
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Gains of all channels on path `m` at node `b`.
    #[inline]
    pub fn at(&self, m: usize, b: usize) -> &[f64] {
        let start = (m * self.steps + b) * self.channels;
        &self.gains[start..start + self.channels]
    }

    /// All nodes of path `m`, `steps * channels` values.
    #[inline]
    pub fn path(&self, m: usize) -> &[f64] {
        let len = self.steps * self.channels;
        &self.gains[m * len..(m + 1) * len]
    }
}
