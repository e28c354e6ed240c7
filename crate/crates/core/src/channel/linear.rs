//! Exact one-step transition of a scalar linear SDE
//! `dX = (f(t) - k(t) X) dt + g(t) dW` between consecutive grid nodes.
//!
//! Over `[a, b]` the solution satisfies `X(b) = rho X(a) + zeta + sigma xi`
//! with
//!
//! ```text
//! rho     = exp(-∫_a^b k)
//! zeta    = ∫_a^b f(s) exp(-∫_s^b k) ds
//! sigma^2 = ∫_a^b g(s)^2 exp(-2 ∫_s^b k) ds
//! ```
//!
//! Steps are split at coefficient discontinuities; pieces on which every
//! coefficient is constant use closed forms, the rest use composite Simpson.

use super::coefficient::CoefficientFn;
use super::grid::TimeGrid;
use crate::error::{Error, Result};

/// Per-step transition coefficients, one entry per grid step `b = 1..=n`
/// (stored at index `b - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct StepCoefficients {
    pub rho: Vec<f64>,
    pub zeta: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl StepCoefficients {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Deterministic mean and variance at every grid node, starting from a
    /// point mass at `x0`.
    pub fn propagate_moments(&self, x0: f64) -> (Vec<f64>, Vec<f64>) {
        let mut mean = Vec::with_capacity(self.len() + 1);
        let mut var = Vec::with_capacity(self.len() + 1);
        mean.push(x0);
        var.push(0.0);
        for b in 0..self.len() {
            let (m, v) = (mean[b], var[b]);
            mean.push(self.rho[b] * m + self.zeta[b]);
            var.push(self.rho[b] * self.rho[b] * v + self.sigma[b] * self.sigma[b]);
        }
        (mean, var)
    }
}

/// Forcing term `f(t)`.
pub(crate) enum Forcing<'a> {
    Zero,
    /// `f = p * q`
    Product(&'a CoefficientFn, &'a CoefficientFn),
}

pub(crate) struct LinearSde<'a> {
    /// Mean-reversion rate `k(t)`; stored as the function and a sign so the
    /// inphase/quadrature drift `A(t) X` maps to `k = -A`.
    pub rate: &'a CoefficientFn,
    pub rate_sign: f64,
    pub forcing: Forcing<'a>,
    pub diffusion: &'a CoefficientFn,
    /// Reject non-positive rates at any evaluation node.
    pub require_positive_rate: bool,
}

#[derive(Clone, Copy)]
struct Piece {
    rho: f64,
    zeta: f64,
    var: f64,
}

impl Piece {
    const IDENTITY: Piece = Piece {
        rho: 1.0,
        zeta: 0.0,
        var: 0.0,
    };

    /// Transition over `[a, c]` followed by `[c, b]`.
    fn then(self, next: Piece) -> Piece {
        Piece {
            rho: self.rho * next.rho,
            zeta: next.rho * self.zeta + next.zeta,
            var: next.rho * next.rho * self.var + next.var,
        }
    }
}

/// `(1 - exp(-z h)) / z`, continuous at `z = 0`.
#[inline]
pub(crate) fn decay_integral(z: f64, h: f64) -> f64 {
    if z == 0.0 {
        h
    } else {
        -(-z * h).exp_m1() / z
    }
}

impl LinearSde<'_> {
    fn functions(&self) -> Vec<&CoefficientFn> {
        let mut fns = vec![self.rate, self.diffusion];
        if let Forcing::Product(p, q) = self.forcing {
            fns.push(p);
            fns.push(q);
        }
        fns
    }

    #[inline]
    fn rate_at(&self, t: f64) -> Result<f64> {
        let k = self.rate_sign * self.rate.eval(t);
        if self.require_positive_rate && !(k > 0.0) {
            return Err(Error::InvalidModel(format!(
                "mean-reversion speed must be positive, got {k} at t = {t}"
            )));
        }
        Ok(k)
    }

    #[inline]
    fn forcing_at(&self, t: f64) -> f64 {
        match self.forcing {
            Forcing::Zero => 0.0,
            Forcing::Product(p, q) => p.eval(t) * q.eval(t),
        }
    }

    pub fn step_coefficients(&self, grid: &TimeGrid, quad_substeps: usize) -> Result<StepCoefficients> {
        if quad_substeps == 0 {
            return Err(Error::InvalidModel("quad_substeps must be at least 1".into()));
        }
        let fns = self.functions();
        let n = grid.n();
        let mut out = StepCoefficients {
            rho: Vec::with_capacity(n),
            zeta: Vec::with_capacity(n),
            sigma: Vec::with_capacity(n),
        };
        for b in 1..=n {
            let (a, e) = (grid.node(b - 1), grid.node(b));
            let mut cuts: Vec<f64> = fns.iter().flat_map(|f| f.breakpoints_in(a, e)).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut acc = Piece::IDENTITY;
            let mut left = a;
            for right in cuts.into_iter().chain(std::iter::once(e)) {
                let piece = self.piece(&fns, left, right, quad_substeps)?;
                acc = acc.then(piece);
                left = right;
            }
            out.rho.push(acc.rho);
            out.zeta.push(acc.zeta);
            out.sigma.push(acc.var.max(0.0).sqrt());
        }
        Ok(out)
    }

    fn piece(&self, fns: &[&CoefficientFn], a: f64, b: f64, m: usize) -> Result<Piece> {
        let h = b - a;
        if fns.iter().all(|f| f.constant_on(a, b).is_some()) {
            let mid = 0.5 * (a + b);
            let k = self.rate_at(mid)?;
            let f = self.forcing_at(mid);
            let g = self.diffusion.eval(mid);
            return Ok(Piece {
                rho: (-k * h).exp(),
                zeta: f * decay_integral(k, h),
                var: g * g * decay_integral(2.0 * k, h),
            });
        }
        self.simpson_piece(a, b, m)
    }

    /// Composite Simpson with `m` panels (`2m` subintervals). The inner
    /// integral `∫_s^b k` at each node comes from a cumulative Simpson sum on
    /// the same nodes, each subinterval refined by its own midpoint.
    fn simpson_piece(&self, a: f64, b: f64, m: usize) -> Result<Piece> {
        let nodes = 2 * m;
        let hh = (b - a) / nodes as f64;
        let mut cum = Vec::with_capacity(nodes + 1);
        let mut ks = Vec::with_capacity(nodes + 1);
        cum.push(0.0);
        ks.push(self.rate_at(a)?);
        for j in 0..nodes {
            let left = a + j as f64 * hh;
            let right = if j + 1 == nodes { b } else { a + (j + 1) as f64 * hh };
            let k_mid = self.rate_at(0.5 * (left + right))?;
            let k_right = self.rate_at(right)?;
            let inc = (right - left) / 6.0 * (ks[j] + 4.0 * k_mid + k_right);
            cum.push(cum[j] + inc);
            ks.push(k_right);
        }
        let total = cum[nodes];
        let (mut zeta, mut var) = (0.0, 0.0);
        for j in 0..=nodes {
            let t = if j == nodes { b } else { a + j as f64 * hh };
            let w = if j == 0 || j == nodes {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let inner = total - cum[j];
            let g = self.diffusion.eval(t);
            zeta += w * self.forcing_at(t) * (-inner).exp();
            var += w * g * g * (-2.0 * inner).exp();
        }
        Ok(Piece {
            rho: (-total).exp(),
            zeta: zeta * hh / 3.0,
            var: var * hh / 3.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ltf<'a>(beta: &'a CoefficientFn, gamma: &'a CoefficientFn, delta: &'a CoefficientFn) -> LinearSde<'a> {
        LinearSde {
            rate: beta,
            rate_sign: 1.0,
            forcing: Forcing::Product(beta, gamma),
            diffusion: delta,
            require_positive_rate: true,
        }
    }

    #[test]
    fn decay_integral_limits() {
        assert_eq!(decay_integral(0.0, 0.3), 0.3);
        assert!((decay_integral(1e-12, 0.3) - 0.3).abs() < 1e-12);
        assert!((decay_integral(2.0, 1.0) - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn simpson_matches_closed_form_for_constants() {
        let beta = CoefficientFn::constant(100.0);
        let gamma = CoefficientFn::constant(70.0);
        let delta = CoefficientFn::constant(25.0);
        let sde = ltf(&beta, &gamma, &delta);
        let q = sde.simpson_piece(0.0, 0.01, 64).unwrap();
        let c = sde.piece(&sde.functions(), 0.0, 0.01, 64).unwrap();
        assert!((q.rho - c.rho).abs() < 1e-12);
        assert!((q.zeta - c.zeta).abs() < 1e-9);
        assert!((q.var - c.var).abs() < 1e-9);
    }

    #[test]
    fn splitting_composes_exactly() {
        let beta = CoefficientFn::piecewise(vec![0.005], vec![10.0, 500.0]).unwrap();
        let gamma = CoefficientFn::constant(70.0);
        let delta = CoefficientFn::constant(20.0);
        let sde = ltf(&beta, &gamma, &delta);
        let grid = TimeGrid::new(0.0, 0.01, 1).unwrap();
        let c = sde.step_coefficients(&grid, 8).unwrap();
        let first = Piece {
            rho: (-10.0f64 * 0.005).exp(),
            zeta: 70.0 * (1.0 - (-10.0f64 * 0.005).exp()),
            var: 400.0 * (1.0 - (-20.0f64 * 0.005).exp()) / 20.0,
        };
        let second = Piece {
            rho: (-500.0f64 * 0.005).exp(),
            zeta: 70.0 * (1.0 - (-500.0f64 * 0.005).exp()),
            var: 400.0 * (1.0 - (-1000.0f64 * 0.005).exp()) / 1000.0,
        };
        let both = first.then(second);
        assert!((c.rho[0] - both.rho).abs() < 1e-14);
        assert!((c.zeta[0] - both.zeta).abs() < 1e-10);
        assert!((c.sigma[0] - both.var.sqrt()).abs() < 1e-12);
    }
}
