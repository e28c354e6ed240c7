//! Cross-layer network utility maximization for multihop wireless networks
//! whose links fade according to linear SDEs with time-varying coefficients.

pub mod channel;
pub mod error;
pub mod format;
pub mod harness;
pub mod layers;
pub mod network;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
