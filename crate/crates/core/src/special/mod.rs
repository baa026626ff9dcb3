//! Closed-form references: Gamma, Mittag-Leffler, fractional sine and
//! cosine, the Taylor-series form of the Wright-type transform, and the
//! Gaussian heat kernel. Also home of the validated [`FracOrder`].

pub mod gamma;
pub mod mittag_leffler;
mod order;

use std::f64::consts::PI;

pub use gamma::{gamma, ln_gamma, rgamma};
pub use mittag_leffler::{ml, mittag_leffler, mittag_leffler_real, MLParams};
pub use order::FracOrder;

use crate::compensated::CompensatedSum;
use crate::error::{domain, Result};

fn check_beta_t(beta: f64, t: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return domain(format!("beta must lie in (0, 1], got {beta}"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("t must be a finite non-negative number, got {t}"));
    }
    Ok(())
}

/// Fractional sine sin_β(t) = t^β E_{2β,β+1}(-t^{2β}).
pub fn frac_sin(beta: f64, t: f64) -> Result<f64> {
    check_beta_t(beta, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let tb = t.powf(beta);
    Ok(tb * ml(2.0 * beta, beta + 1.0, -tb * tb)?)
}

/// Fractional cosine cos_β(t) = E_{2β}(-t^{2β}).
pub fn frac_cos(beta: f64, t: f64) -> Result<f64> {
    check_beta_t(beta, t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let tb = t.powf(beta);
    ml(2.0 * beta, 1.0, -tb * tb)
}

/// Wright-type transform of a function from its Taylor coefficients at 0:
/// Σ_n f^{(n)}(0) t^{βn} / Γ(nβ + 1).
pub fn frac_transform_series(taylor_coeffs: &[f64], beta: f64, t: f64) -> Result<f64> {
    check_beta_t(beta, t)?;
    if taylor_coeffs.is_empty() {
        return domain("Taylor coefficient list is empty");
    }
    let tb = t.powf(beta);
    let mut sum = CompensatedSum::new();
    let mut power = 1.0;
    for (n, c) in taylor_coeffs.iter().enumerate() {
        if *c != 0.0 {
            sum.add(c * power * rgamma(n as f64 * beta + 1.0));
        }
        power *= tb;
    }
    Ok(sum.value())
}

/// Gaussian heat kernel (4πt)^{-1/2} exp(-x²/(4t)), the Green function of
/// ∂_t u = ∂_x² u.
pub fn heat_kernel(x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("heat kernel needs t > 0, got {t}"));
    }
    Ok(heat_kernel_unchecked(x, t))
}

#[inline]
pub(crate) fn heat_kernel_unchecked(x: f64, t: f64) -> f64 {
    (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}
