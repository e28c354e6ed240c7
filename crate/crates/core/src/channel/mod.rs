//! Channel-state processes and their exact sampling on a time grid.

mod coefficient;
mod grid;
mod linear;
mod ltf;
mod stf;

use std::io::Write;
use std::path::Path;

pub use coefficient::CoefficientFn;
pub use grid::TimeGrid;
pub use linear::StepCoefficients;
pub use ltf::{attenuation_ltf, ltf_mean_variance, ltf_step_coefficients, sample_ltf_into, LtfChannelModel};
pub use stf::{attenuation_stf, sample_stf_with, StfChannelModel};

use crate::error::{Error, Result};
use crate::format::sig9;
use crate::rng::StreamKey;

#[derive(Debug, Clone, PartialEq)]
pub enum PathValues {
    /// Power loss in dB.
    Ltf(Vec<f64>),
    Stf { i: Vec<f64>, q: Vec<f64> },
}

/// One sampled trajectory with the key it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub values: PathValues,
    pub key: StreamKey,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        match &self.values {
            PathValues::Ltf(x) => x.len(),
            PathValues::Stf { i, .. } => i.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn attenuation(&self) -> Vec<f64> {
        match &self.values {
            PathValues::Ltf(x) => x.iter().map(|&v| attenuation_ltf(v)).collect(),
            PathValues::Stf { i, q } => i.iter().zip(q).map(|(&a, &b)| attenuation_stf(a, b)).collect(),
        }
    }

    /// Loss in dB at every node; for STF paths this is `-10 log10(I^2 + Q^2)`.
    pub fn loss_db(&self) -> Vec<f64> {
        match &self.values {
            PathValues::Ltf(x) => x.clone(),
            PathValues::Stf { .. } => self.attenuation().iter().map(|a| -10.0 * a.log10()).collect(),
        }
    }
}

pub fn sample_ltf_path(model: &LtfChannelModel, coeffs: &StepCoefficients, key: StreamKey) -> SamplePath {
    let mut x = vec![0.0; coeffs.len() + 1];
    sample_ltf_into(model.x0, coeffs, key, &mut x);
    SamplePath {
        values: PathValues::Ltf(x),
        key,
    }
}

pub fn sample_stf_path(model: &StfChannelModel, grid: &TimeGrid, key: StreamKey) -> Result<SamplePath> {
    let coeffs = model.step_coefficients(grid, 64)?;
    let (i, q) = sample_stf_with(model, &coeffs, key);
    Ok(SamplePath {
        values: PathValues::Stf { i, q },
        key,
    })
}

/// Writes `path,b,tau,x_db` rows for every node of every path.
pub fn write_paths_csv(file: &Path, grid: &TimeGrid, paths: &[SamplePath]) -> Result<()> {
    let f = std::fs::File::create(file).map_err(|e| Error::io(file, e))?;
    let mut w = std::io::BufWriter::new(f);
    let io = |e| Error::io(file, e);
    writeln!(w, "path,b,tau,x_db").map_err(io)?;
    for p in paths {
        for (b, x) in p.loss_db().iter().enumerate() {
            writeln!(w, "{},{},{},{}", p.key.path, b, sig9(grid.node(b)), sig9(*x)).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}
