use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// True parameters `(p, θ, ρ, σ²)` of the model. The order `p` is the
/// length of `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: Vec<f64>,
    pub rho: f64,
    #[serde(default = "unit_variance")]
    pub sigma2: f64,
}

fn unit_variance() -> f64 {
    1.0
}

impl ModelParams {
    /// Builds and validates the parameters.
    pub fn new(theta: Vec<f64>, rho: f64, sigma2: f64) -> Result<Self> {
        let params = Self {
            theta,
            rho,
            sigma2,
        };
        params.check_stability()?;
        Ok(params)
    }

    pub fn p(&self) -> usize {
        self.theta.len()
    }

    /// Last autoregressive coefficient `θ_p`.
    pub fn theta_p(&self) -> f64 {
        *self.theta.last().expect("theta is non-empty")
    }

    /// Succeeds iff `‖θ‖₁ < 1`, `|ρ| < 1`, `θ ≠ 0` and `σ² > 0`. The
    /// stability region is open: boundary points are rejected.
    pub fn check_stability(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(Error::InvalidInput("model order p must be at least 1".into()));
        }
        if self.theta.iter().any(|t| !t.is_finite()) || !self.rho.is_finite() {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        let norm: f64 = self.theta.iter().map(|t| t.abs()).sum();
        if norm >= 1.0 {
            return Err(Error::UnstableTheta { norm });
        }
        if self.rho.abs() >= 1.0 {
            return Err(Error::UnstableRho {
                abs: self.rho.abs(),
            });
        }
        if self.theta.iter().all(|&t| t == 0.0) {
            return Err(Error::ZeroTheta);
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::BadVariance(self.sigma2));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(theta: Vec<f64>, rho: f64, sigma2: f64) -> ModelParams {
        ModelParams {
            theta,
            rho,
            sigma2,
        }
    }

    #[test]
    fn inside_region_is_ok() {
        assert!(raw(vec![0.5], 0.3, 1.0).check_stability().is_ok());
    }

    #[test]
    fn theta_norm_above_one() {
        assert!(matches!(
            raw(vec![0.6, 0.5], 0.0, 1.0).check_stability(),
            Err(Error::UnstableTheta { .. })
        ));
    }

    #[test]
    fn boundaries_are_rejected() {
        assert!(matches!(
            raw(vec![0.5], 1.0, 1.0).check_stability(),
            Err(Error::UnstableRho { .. })
        ));
        assert!(matches!(
            raw(vec![0.5, -0.5], 0.0, 1.0).check_stability(),
            Err(Error::UnstableTheta { .. })
        ));
    }

    #[test]
    fn zero_theta_and_bad_variance() {
        assert_eq!(raw(vec![0.0, 0.0], 0.1, 1.0).check_stability(), Err(Error::ZeroTheta));
        assert!(matches!(
            raw(vec![0.2], 0.1, 0.0).check_stability(),
            Err(Error::BadVariance(_))
        ));
        assert!(matches!(
            raw(vec![0.2], 0.1, f64::NAN).check_stability(),
            Err(Error::BadVariance(_))
        ));
    }
}
