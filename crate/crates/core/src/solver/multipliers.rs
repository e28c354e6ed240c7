use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lagrange multipliers: `mu[d][i]` for flow conservation of node `i`
/// toward destination `d` (index into the destination list), `ell[e]` per
/// link, `nu[i]` per node power budget. `mu[d][destination]` stays 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub mu: Vec<Vec<f64>>,
    pub ell: Vec<f64>,
    pub nu: Vec<f64>,
}

impl Multipliers {
    pub fn filled(destinations: &[usize], nodes: usize, links: usize, mu: f64, ell: f64, nu: f64) -> Self {
        Self {
            mu: destinations
                .iter()
                .map(|&d| (0..nodes).map(|i| if i == d { 0.0 } else { mu }).collect())
                .collect(),
            ell: vec![ell; links],
            nu: vec![nu; nodes],
        }
    }

    pub fn len(&self) -> usize {
        self.mu.iter().map(Vec::len).sum::<usize>() + self.ell.len() + self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All components in a fixed order: `mu` row by row, then `ell`, `nu`.
    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.mu.iter().flatten().chain(&self.ell).chain(&self.nu).copied()
    }

    pub fn flat_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.mu.iter_mut().flatten().chain(self.ell.iter_mut()).chain(self.nu.iter_mut())
    }

    /// `sum |self - other|` over all components.
    pub fn l1_distance(&self, other: &Multipliers) -> f64 {
        self.flat().zip(other.flat()).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Componentwise `max(0, m + kappa g)`; `g` is laid out like `m`.
pub fn update_multipliers(m: &Multipliers, g: &Multipliers, kappa: f64) -> Multipliers {
    let mut out = m.clone();
    for (x, gx) in out.flat_mut().zip(g.flat()) {
        *x = (*x + kappa * gx).max(0.0);
    }
    out
}

/// Diminishing step `a / eta` for `eta >= 1`.
pub fn step_size(eta: usize, a: f64) -> Result<f64> {
    if eta == 0 {
        return Err(Error::InvalidIteration(eta));
    }
    Ok(a / eta as f64)
}

/// True when the per-iteration multiplier changes over the last `window`
/// iterations sum to less than `tol`.
pub fn converged(changes: &[f64], window: usize, tol: f64) -> bool {
    window >= 1 && changes.len() >= window && changes[changes.len() - window..].iter().sum::<f64>() < tol
}
