use crate::error::{domain, Result};

/// Orders of a space–time fractional equation: Caputo order `beta` in time,
/// Riesz–Feller order `alpha` and skewness `theta` in space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    pub beta: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl FracOrder {
    pub fn new(beta: f64, alpha: f64, theta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return domain(format!("beta must lie in (0, 1], got {beta}"));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return domain(format!("alpha must lie in (0, 2], got {alpha}"));
        }
        let bound = alpha.min(2.0 - alpha);
        if !(theta.abs() <= bound) {
            return domain(format!(
                "|theta| must not exceed min(alpha, 2 - alpha) = {bound}, got {theta}"
            ));
        }
        Ok(Self { beta, alpha, theta })
    }

    /// Symmetric order, θ = 0.
    pub fn symmetric(beta: f64, alpha: f64) -> Result<Self> {
        Self::new(beta, alpha, 0.0)
    }

    pub(crate) fn require_symmetric(&self) -> Result<()> {
        if self.theta != 0.0 {
            return domain(format!(
                "only theta = 0 is supported here, got {}",
                self.theta
            ));
        }
        Ok(())
    }
}
