use serde::{Deserialize, Serialize};

/// Flow utility `U(lambda, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Utility {
    /// `w ln(lambda)`
    Log {
        #[serde(default = "one")]
        weight: f64,
    },
    /// `w lambda^(1 - alpha) / (1 - alpha)`, `w ln(lambda)` at `alpha = 1`.
    AlphaFair {
        alpha: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    /// `1 / (1 + exp(-steepness (lambda - midpoint)))`
    Sigmoid { steepness: f64, midpoint: f64 },
    /// `ln(lambda) / t`
    LogOverTime,
}

fn one() -> f64 {
    1.0
}

impl Default for Utility {
    fn default() -> Self {
        Utility::Log { weight: 1.0 }
    }
}

impl Utility {
    pub fn value(&self, lambda: f64, t: f64) -> f64 {
        match *self {
            Utility::Log { weight } => weight * lambda.ln(),
            Utility::AlphaFair { alpha, weight } => {
                if alpha == 1.0 {
                    weight * lambda.ln()
                } else {
                    weight * lambda.powf(1.0 - alpha) / (1.0 - alpha)
                }
            }
            Utility::Sigmoid { steepness, midpoint } => 1.0 / (1.0 + (-steepness * (lambda - midpoint)).exp()),
            Utility::LogOverTime => lambda.ln() / t,
        }
    }

    pub fn derivative(&self, lambda: f64, t: f64) -> f64 {
        match *self {
            Utility::Log { weight } => weight / lambda,
            Utility::AlphaFair { alpha, weight } => weight * lambda.powf(-alpha),
            Utility::Sigmoid { steepness, midpoint } => {
                let e = (-steepness * (lambda - midpoint)).exp();
                steepness * e / ((1.0 + e) * (1.0 + e))
            }
            Utility::LogOverTime => 1.0 / (t * lambda),
        }
    }

    pub fn is_concave(&self) -> bool {
        !matches!(self, Utility::Sigmoid { .. })
    }

    pub fn is_time_varying(&self) -> bool {
        matches!(self, Utility::LogOverTime)
    }

    /// Utilities with a pole at `t = 0`.
    pub fn needs_positive_time(&self) -> bool {
        self.is_time_varying()
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = match *self {
            Utility::Log { weight } => weight.is_finite() && weight > 0.0,
            Utility::AlphaFair { alpha, weight } => alpha.is_finite() && alpha > 0.0 && weight.is_finite() && weight > 0.0,
            Utility::Sigmoid { steepness, midpoint } => steepness.is_finite() && steepness > 0.0 && midpoint.is_finite(),
            Utility::LogOverTime => true,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid utility parameters: {self:?}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let us = [
            Utility::Log { weight: 2.0 },
            Utility::AlphaFair { alpha: 2.0, weight: 1.0 },
            Utility::AlphaFair { alpha: 1.0, weight: 1.0 },
            Utility::Sigmoid { steepness: 3.0, midpoint: 1.0 },
            Utility::LogOverTime,
        ];
        for u in us {
            for &(l, t) in &[(0.5, 1.5), (1.3, 2.0), (4.0, 1.0)] {
                let h = 1e-6;
                let fd = (u.value(l + h, t) - u.value(l - h, t)) / (2.0 * h);
                assert!((fd - u.derivative(l, t)).abs() < 1e-6, "{u:?}");
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let u: Utility = toml::from_str("kind = \"alpha-fair\"\nalpha = 2.0").unwrap();
        assert_eq!(u, Utility::AlphaFair { alpha: 2.0, weight: 1.0 });
        let u: Utility = toml::from_str("kind = \"log-over-time\"").unwrap();
        assert!(u.is_time_varying());
    }
}
