//! Random times: one-sided stable laws by Kanter's method, stable
//! subordinators, inverse stable subordinators, and their compositions.
//!
//! All randomness flows through [`RngStream`], a ChaCha20 generator keyed by
//! `master_seed` with `stream_id` selecting one of 2^64 independent
//! keystreams. Equal `(master_seed, stream_id)` pairs replay the same draws.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::table::Table;

/// A reproducible source of uniform and Gaussian variates.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on the open interval (0, 1): the midpoints of a 2^-53 grid,
    /// so neither 0 nor 1 can occur.
    #[inline]
    pub fn open_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Draws of one law, with the seed and stream that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub master_seed: u64,
    pub stream_id: u64,
    pub law: String,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["value"])
            .with_meta("law", &self.law)
            .with_meta("master_seed", self.master_seed)
            .with_meta("stream_id", self.stream_id)
            .with_meta("n", self.n());
        t.rows = self.values.iter().map(|v| vec![*v]).collect();
        t
    }

    pub fn from_table(t: &Table) -> Result<Self> {
        let meta = |k: &str| {
            t.meta_value(k)
                .ok_or_else(|| Error::Parse(format!("missing `{k}` header line")))
        };
        let parse_u64 = |k: &str| -> Result<u64> {
            meta(k)?
                .parse()
                .map_err(|_| Error::Parse(format!("bad `{k}` header")))
        };
        let values = t
            .column("value")
            .ok_or_else(|| Error::Parse("missing `value` column".into()))?;
        Ok(Self {
            law: meta("law")?.to_string(),
            master_seed: parse_u64("master_seed")?,
            stream_id: parse_u64("stream_id")?,
            values,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_table().write_path(path)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table(&Table::read_path(path)?)
    }
}

fn check_index(name: &str, a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return domain(format!(
            "Kanter sampling needs {name} in (0, 1), got {a}"
        ));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("time must be finite and non-negative, got {t}"));
    }
    Ok(())
}

/// Kanter's function a(φ) = (sin αφ / sin φ)^{1/(1-α)} · sin((1-α)φ) / sin αφ.
pub fn kanter_a(alpha: f64, phi: f64) -> Result<f64> {
    check_index("alpha", alpha)?;
    if !(phi > 0.0 && phi < PI) {
        return domain(format!("phi must lie in (0, pi), got {phi}"));
    }
    Ok(ln_kanter_a(alpha, phi).exp())
}

#[inline]
fn ln_kanter_a(alpha: f64, phi: f64) -> f64 {
    let sa = (alpha * phi).sin().ln();
    (sa - phi.sin().ln()) / (1.0 - alpha) + ((1.0 - alpha) * phi).sin().ln() - sa
}

/// ln X for X with Laplace transform e^{-s^α}.
#[inline]
fn ln_stable(alpha: f64, rng: &mut RngStream) -> f64 {
    let e = -rng.open_uniform().ln();
    let phi = PI * rng.open_uniform();
    (1.0 - alpha) / alpha * (ln_kanter_a(alpha, phi) - e.ln())
}

/// A distribution that can be drawn from a stream.
pub trait Sampler: Sync {
    type Output: Copy + fmt::Debug + Send;

    fn draw(&self, rng: &mut RngStream) -> Self::Output;
}

/// Scalar laws on the non-negative half-line used as random times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    /// Standard one-sided stable X, E e^{-sX} = e^{-s^α}.
    StableOneSided { alpha: f64 },
    /// α-stable subordinator at time t, X t^{1/α}.
    Subordinator { alpha: f64, t: f64 },
    /// Inverse β-stable subordinator T_β(t) = (t / X)^β, density g_β(·; t).
    InverseSubordinator { beta: f64, t: f64 },
    /// The deterministic time `t` (the β = 1 limit of T_β(t)).
    Fixed(f64),
    /// τ = X_{α/2} S^{2/α} with S = T_β(t): the operational time of the
    /// space–time fractional diffusion. α = 2 gives τ = S, β = 1 gives S = t.
    SubordinatedInverse { alpha: f64, beta: f64, t: f64 },
    /// T_β(T_α(t)): an inverse subordinator run on another one's clock.
    NestedInverse { beta: f64, alpha: f64, t: f64 },
}

impl Law {
    pub fn stable(alpha: f64) -> Result<Self> {
        check_index("alpha", alpha)?;
        Ok(Law::StableOneSided { alpha })
    }

    pub fn subordinator(alpha: f64, t: f64) -> Result<Self> {
        check_index("alpha", alpha)?;
        if !(t > 0.0 && t.is_finite()) {
            return domain(format!("subordinator time must be positive, got {t}"));
        }
        Ok(Law::Subordinator { alpha, t })
    }

    pub fn inverse_subordinator(beta: f64, t: f64) -> Result<Self> {
        check_index("beta", beta)?;
        check_time(t)?;
        Ok(Law::InverseSubordinator { beta, t })
    }

    /// T_β(t) for β in (0, 1], falling back to the fixed time at β = 1.
    pub fn inverse_time(beta: f64, t: f64) -> Result<Self> {
        if beta == 1.0 {
            check_time(t)?;
            Ok(Law::Fixed(t))
        } else {
            Self::inverse_subordinator(beta, t)
        }
    }

    pub fn subordinated_inverse(alpha: f64, beta: f64, t: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return domain(format!("alpha must lie in (0, 2], got {alpha}"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return domain(format!("beta must lie in (0, 1], got {beta}"));
        }
        check_time(t)?;
        Ok(Law::SubordinatedInverse { alpha, beta, t })
    }

    pub fn nested_inverse(beta: f64, alpha: f64, t: f64) -> Result<Self> {
        check_index("beta", beta)?;
        check_index("alpha", alpha)?;
        check_time(t)?;
        Ok(Law::NestedInverse { beta, alpha, t })
    }

    /// Short description recorded in CSV headers.
    pub fn tag(&self) -> String {
        match *self {
            Law::StableOneSided { alpha } => format!("stable-oneside alpha={alpha}"),
            Law::Subordinator { alpha, t } => format!("subordinator alpha={alpha} t={t}"),
            Law::InverseSubordinator { beta, t } => {
                format!("inverse-subordinator beta={beta} t={t}")
            }
            Law::Fixed(t) => format!("fixed t={t}"),
            Law::SubordinatedInverse { alpha, beta, t } => {
                format!("subordinated-inverse alpha={alpha} beta={beta} t={t}")
            }
            Law::NestedInverse { beta, alpha, t } => {
                format!("nested-inverse beta={beta} alpha={alpha} t={t}")
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream, n: usize) -> SampleBatch {
        SampleBatch {
            values: (0..n).map(|_| self.draw(rng)).collect(),
            master_seed: rng.master_seed(),
            stream_id: rng.stream_id(),
            law: self.tag(),
        }
    }
}

#[inline]
fn inverse_draw(beta: f64, t: f64, rng: &mut RngStream) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if beta == 1.0 {
        return t;
    }
    (beta * (t.ln() - ln_stable(beta, rng))).exp()
}

impl Sampler for Law {
    type Output = f64;

    #[inline]
    fn draw(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Law::StableOneSided { alpha } => ln_stable(alpha, rng).exp(),
            Law::Subordinator { alpha, t } => (ln_stable(alpha, rng) + t.ln() / alpha).exp(),
            Law::InverseSubordinator { beta, t } => inverse_draw(beta, t, rng),
            Law::Fixed(t) => t,
            Law::SubordinatedInverse { alpha, beta, t } => {
                let s = inverse_draw(beta, t, rng);
                if alpha == 2.0 || s == 0.0 {
                    s
                } else {
                    (ln_stable(0.5 * alpha, rng) + 2.0 / alpha * s.ln()).exp()
                }
            }
            Law::NestedInverse { beta, alpha, t } => {
                let s = inverse_draw(alpha, t, rng);
                inverse_draw(beta, s, rng)
            }
        }
    }
}

/// Independent pair of draws, first from `.0` then from `.1`.
impl<A: Sampler, B: Sampler> Sampler for (A, B) {
    type Output = (A::Output, B::Output);

    #[inline]
    fn draw(&self, rng: &mut RngStream) -> Self::Output {
        let a = self.0.draw(rng);
        (a, self.1.draw(rng))
    }
}

/// n draws of the standard one-sided α-stable law, Laplace transform e^{-s^α}.
pub fn sample_stable_oneside(stream: &mut RngStream, alpha: f64, n: usize) -> Result<SampleBatch> {
    Ok(Law::stable(alpha)?.sample(stream, n))
}

/// n draws of the α-stable subordinator at time t.
pub fn sample_subordinator(
    stream: &mut RngStream,
    alpha: f64,
    t: f64,
    n: usize,
) -> Result<SampleBatch> {
    Ok(Law::subordinator(alpha, t)?.sample(stream, n))
}

/// n draws of the inverse β-stable subordinator T_β(t); all zero when t = 0.
pub fn sample_inverse_subordinator(
    stream: &mut RngStream,
    beta: f64,
    t: f64,
    n: usize,
) -> Result<SampleBatch> {
    Ok(Law::inverse_subordinator(beta, t)?.sample(stream, n))
}

/// n draws from the heat kernel at time τ: mean zero, variance 2τ.
pub fn sample_gaussian(stream: &mut RngStream, tau: f64, n: usize) -> Result<Vec<f64>> {
    if !(tau > 0.0 && tau.is_finite()) {
        return domain(format!("Gaussian time scale must be positive, got {tau}"));
    }
    let sd = (2.0 * tau).sqrt();
    Ok((0..n).map(|_| sd * stream.standard_normal()).collect())
}
