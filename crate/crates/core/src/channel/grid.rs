use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `tau_b = s + b * dt`, `b = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    s: f64,
    t_end: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(s: f64, t_end: f64, n: usize) -> Result<Self> {
        if !(s.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if s < 0.0 {
            return Err(Error::InvalidGrid(format!("start time must be >= 0, got {s}")));
        }
        if t_end <= s {
            return Err(Error::InvalidGrid(format!("end time {t_end} must exceed start time {s}")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("need at least one step".into()));
        }
        Ok(Self { s, t_end, n })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.t_end - self.s
    }

    pub fn dt(&self) -> f64 {
        self.horizon() / self.n as f64
    }

    /// Node `b`; the last node is exactly `T`.
    #[inline]
    pub fn node(&self, b: usize) -> f64 {
        if b == self.n {
            self.t_end
        } else {
            self.s + b as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|b| self.node(b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let g = TimeGrid::new(0.3, 1.7, 7).unwrap();
        assert_eq!(g.node(0), 0.3);
        assert_eq!(g.node(7), 1.7);
        assert!((g.dt() - 0.2).abs() < 1e-15);
        assert_eq!(g.nodes().len(), 8);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(2.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 3).is_err());
    }
}
