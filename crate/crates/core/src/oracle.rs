//! Sampling-free references: the Fourier-inversion Green function of the
//! symmetric space–time fractional diffusion, the β = 1/2 density of the
//! inverse subordinator, and the Laplace-transform check of T_β(t).

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::mc::{expect_sharded, Estimate};
use crate::quad::{integrate, QuadratureConfig};
use crate::sampler::Law;
use crate::special::{ml, rgamma, FracOrder};

/// Envelope level that defines the default truncation radius.
pub const ENVELOPE_CUTOFF: f64 = 1e-12;
/// Most half-periods summed before giving up on the accelerated series.
const MAX_PIECES: usize = 400;

/// Runs `f` with a trap that maps `Err` to NaN and keeps the first error,
/// which then becomes the result.
fn with_trap<T>(f: impl FnOnce(&dyn Fn(Result<f64>) -> f64) -> Result<T>) -> Result<T> {
    let slot: Cell<Option<Error>> = Cell::new(None);
    let trap = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            let prev = slot.take();
            slot.set(Some(prev.unwrap_or(e)));
            f64::NAN
        }
    };
    let out = f(&trap);
    match slot.take() {
        Some(e) => Err(e),
        None => out,
    }
}

/// G(x, t) = (1/π) ∫₀^∞ cos(kx) E_β(-k^α t^β) dk, the Green function of
/// ∂_t^β u = D_x^{α,0} u with a point source at the origin.
///
/// For β = 1 the integral is truncated where e^{-k^α t} drops below
/// [`ENVELOPE_CUTOFF`] (or at `cfg.truncation_radius`). For β < 1 the
/// integrand decays only like k^{-α}: away from x = 0 it is summed over
/// half-periods of the cosine with Wynn's ε acceleration; at x = 0 the
/// tail beyond the asymptotic regime is integrated term by term, and the
/// integral diverges when α ≤ 1.
pub fn green_fourier(order: FracOrder, x: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    order.require_symmetric()?;
    cfg.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t must be positive, got {t}"));
    }
    if !x.is_finite() {
        return domain("x must be finite");
    }
    let FracOrder { beta, alpha, .. } = order;
    let x = x.abs();
    let tb = t.powf(beta);
    with_trap(|trap| {
        let envelope = |k: f64| trap(ml(beta, 1.0, -k.powf(alpha) * tb));
        if beta == 1.0 {
            let radius = cfg
                .truncation_radius
                .unwrap_or_else(|| (-ENVELOPE_CUTOFF.ln() / t).powf(1.0 / alpha));
            return if x == 0.0 {
                Ok(integrate(envelope, 0.0, radius, cfg)?.value / PI)
            } else {
                oscillatory(&|k| (k * x).cos() * envelope(k), x, Some(radius), cfg).map(|v| v / PI)
            };
        }
        if x == 0.0 {
            if alpha <= 1.0 {
                return Err(Error::Divergent(format!(
                    "G(0, t) is infinite for alpha = {alpha} <= 1 and beta = {beta} < 1: \
                     E_beta(-k^alpha t^beta) decays like k^-alpha"
                )));
            }
            return origin_with_tail(beta, alpha, tb, cfg).map(|v| v / PI);
        }
        oscillatory(&|k| (k * x).cos() * envelope(k), x, cfg.truncation_radius, cfg).map(|v| v / PI)
    })
}

/// ∫₀^∞ f over half-periods of cos(kx): [0, π/2x], then [(j-½)π/x, (j+½)π/x].
/// Stops at `radius` when given, otherwise accelerates the partial sums.
fn oscillatory(f: &dyn Fn(f64) -> f64, x: f64, radius: Option<f64>, cfg: &QuadratureConfig) -> Result<f64> {
    let half = PI / x;
    let piece_cfg = QuadratureConfig {
        abs_tol: cfg.abs_tol * 0.1,
        ..*cfg
    };
    let mut partial = Vec::new();
    let mut sum = 0.0;
    let mut lo = 0.0;
    let mut hi = 0.5 * half;
    let mut last_est = f64::NAN;
    let mut stable = 0;
    for _ in 0..MAX_PIECES {
        let end = radius.map_or(hi, |r| hi.min(r));
        sum += integrate(f, lo, end, &piece_cfg)?.value;
        if let Some(r) = radius {
            if end >= r {
                return Ok(sum);
            }
        }
        partial.push(sum);
        lo = hi;
        hi += half;
        if partial.len() >= 5 {
            let est = wynn_epsilon(&partial);
            let tol = cfg.abs_tol.max(cfg.rel_tol * est.abs());
            if (est - last_est).abs() <= tol {
                stable += 1;
                if stable >= 2 {
                    return Ok(est);
                }
            } else {
                stable = 0;
            }
            last_est = est;
        }
    }
    Err(Error::Quadrature {
        value: last_est,
        achieved: (wynn_epsilon(&partial) - wynn_epsilon(&partial[..partial.len() - 1])).abs(),
        requested: cfg.abs_tol.max(cfg.rel_tol * last_est.abs()),
    })
}

/// Wynn's ε algorithm; returns the entry of the highest even column built
/// from the last elements of `s`.
pub fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    if n < 3 {
        return *s.last().unwrap_or(&f64::NAN);
    }
    // prev = ε_{k-1}, cur = ε_k over the sequence index
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 || !d.is_finite() {
                return best;
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            let v = *cur.last().unwrap();
            if v.is_finite() {
                best = v;
            } else {
                return best;
            }
        }
    }
    best
}

/// ∫₀^∞ E_β(-k^α tb) dk for α > 1, β < 1: quadrature up to the point where
/// the algebraic expansion of E_β is accurate, term-by-term beyond it.
fn origin_with_tail(beta: f64, alpha: f64, tb: f64, cfg: &QuadratureConfig) -> Result<f64> {
    // u = k^α tb with u^{1/β} ≥ 40 puts E_β in its asymptotic regime
    let u0 = 40f64.powf(beta).max(1.0);
    let k0 = (u0 / tb).powf(1.0 / alpha);
    let head = with_trap(|trap| {
        let f = |k: f64| trap(ml(beta, 1.0, -k.powf(alpha) * tb));
        let mut breaks = vec![0.0];
        let mut b = k0 / 64.0;
        while b < k0 {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(k0);
        Ok(crate::quad::integrate_with_breaks(f, &breaks, cfg)?.value)
    })?;
    // E_β(-u) ~ Σ_{j≥1} (-1)^{j+1} u^{-j} / Γ(1 - βj), integrated from k0
    let mut tail = 0.0;
    let mut prev = f64::INFINITY;
    for j in 1..60 {
        let jf = j as f64;
        let p = alpha * jf - 1.0;
        let g = rgamma(1.0 - beta * jf);
        if g == 0.0 {
            continue;
        }
        let log_mag = -jf * tb.ln() - p * k0.ln() - p.ln();
        let term = if j % 2 == 1 { 1.0 } else { -1.0 } * log_mag.exp() * g;
        if term.abs() > prev && j > 2 {
            break;
        }
        tail += term;
        prev = term.abs();
        if term.abs() < 1e-17 * tail.abs() {
            break;
        }
    }
    Ok(head + tail)
}

/// Density of T_{1/2}(t): e^{-x²/(4t)} / √(πt) on x ≥ 0.
pub fn g_half_density(x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    if x < 0.0 {
        return domain(format!("x must be non-negative, got {x}"));
    }
    Ok((-x * x / (4.0 * t)).exp() / (PI * t).sqrt())
}

/// Monte Carlo E[e^{-s T_β(t)}] next to the exact E_β(-s t^β).
pub fn laplace_check(beta: f64, s: f64, t: f64, n: usize, master_seed: u64, shards: usize) -> Result<(Estimate, f64)> {
    if !(s >= 0.0 && s.is_finite()) {
        return domain(format!("s must be finite and non-negative, got {s}"));
    }
    let law = Law::inverse_subordinator(beta, t)?;
    let mc = expect_sharded(master_seed, &law, |x| (-s * x).exp(), n, shards)?;
    let exact = ml(beta, 1.0, -s * t.powf(beta))?;
    Ok((mc, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // Σ (-1)^k / (k+1) = ln 2
        let mut s = 0.0;
        let partial: Vec<f64> = (0..20)
            .map(|k| {
                s += if k % 2 == 0 { 1.0 } else { -1.0 } / (k + 1) as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&partial) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn classical_closed_forms() {
        let gauss = FracOrder::symmetric(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(green_fourier(gauss, 0.0, 1.0, &cfg()).unwrap(), 0.282_094_791_773_878_14, epsilon = 1e-8);
        assert_abs_diff_eq!(green_fourier(gauss, 1.5, 2.0, &cfg()).unwrap(), crate::special::heat_kernel(1.5, 2.0).unwrap(), epsilon = 1e-8);
        let cauchy = FracOrder::symmetric(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(green_fourier(cauchy, 0.0, 1.0, &cfg()).unwrap(), 1.0 / PI, epsilon = 1e-8);
        assert_abs_diff_eq!(green_fourier(cauchy, 1.0, 1.0, &cfg()).unwrap(), 0.5 / PI, epsilon = 1e-8);
        assert_abs_diff_eq!(green_fourier(cauchy, -3.0, 2.0, &cfg()).unwrap(), 2.0 / (PI * 13.0), epsilon = 1e-8);
    }

    // 30-digit values of ∫₀^∞ g_{1/2}(s; t) s / (π(s² + x²)) ds, the Cauchy
    // kernel subordinated to T_{1/2}(t)
    #[test]
    fn half_order_cauchy_against_subordination_integral() {
        let o = FracOrder::symmetric(0.5, 1.0).unwrap();
        let cases = [
            (1.0, 1.0, 0.120_402_879_068_396_86),
            (2.0, 1.0, 0.053_548_153_293_278_203),
            (1.0, 4.0, 0.107_863_082_288_081_65),
            (2.0, 4.0, 0.060_201_439_534_198_432),
            (0.5, 1.0, 0.215_726_164_576_163_29),
            (10.0, 1.0, 0.003_458_371_962_536_895_1),
            (100.0, 1.0, 3.590_306_893_506_884_8e-5),
        ];
        for (x, t, want) in cases {
            let got = green_fourier(o, x, t, &cfg()).unwrap();
            assert!((got - want).abs() < 1e-10 * want.max(1e-3), "({x}, {t}): {got} vs {want}");
        }
    }

    #[test]
    fn origin_with_algebraic_tail() {
        // ∫₀^∞ heat_kernel(0, s) g_{1/2}(s; 1) ds
        let o = FracOrder::symmetric(0.5, 2.0).unwrap();
        assert_abs_diff_eq!(green_fourier(o, 0.0, 1.0, &cfg()).unwrap(), 0.408_024_469_549_131_49, epsilon = 1e-10);
    }

    #[test]
    fn origin_diverges_for_alpha_at_most_one() {
        let o = FracOrder::symmetric(0.5, 1.0).unwrap();
        assert!(matches!(green_fourier(o, 0.0, 1.0, &cfg()), Err(Error::Divergent(_))));
        assert!(green_fourier(o, 0.5, 1.0, &cfg()).unwrap() > 0.0);
    }

    #[test]
    fn rejects_skewed_orders() {
        let o = FracOrder::new(0.5, 1.5, 0.2).unwrap();
        assert!(green_fourier(o, 0.5, 1.0, &cfg()).is_err());
    }

    #[test]
    fn g_half_values() {
        assert_abs_diff_eq!(g_half_density(0.0, 1.0).unwrap(), 0.564_189_583_547_756_3, epsilon = 1e-15);
        let (x, t) = (1.3, 2.7);
        assert_abs_diff_eq!(
            g_half_density(x, t).unwrap(),
            g_half_density(x / t.sqrt(), 1.0).unwrap() / t.sqrt(),
            epsilon = 1e-15
        );
        assert!(g_half_density(-1.0, 1.0).is_err());
        assert!(g_half_density(1.0, 0.0).is_err());
    }

    #[test]
    fn laplace_check_at_zero() {
        let (mc, exact) = laplace_check(0.5, 0.0, 1.0, 100, 1, 1).unwrap();
        assert_eq!(mc.mean, 1.0);
        assert_eq!(exact, 1.0);
    }
}
