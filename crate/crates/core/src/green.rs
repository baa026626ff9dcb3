//! Monte Carlo Green functions and solutions of the space–time fractional
//! diffusion equation, the fractional wave equation and the fractional
//! Ornstein–Uhlenbeck Fokker–Planck equation.
//!
//! Surfaces use common random numbers: every x in a t-column is evaluated
//! on the same draws, from streams `(master_seed, (column << 32) + shard)`.
//! A single-point solution is the one-cell surface.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::mc::{expect_vec_sharded_at, Estimate, GridSpec, McRun, SolutionSurface};
use crate::sampler::{Law, RngStream, Sampler};
use crate::special::{gamma, heat_kernel_unchecked, FracOrder};
use crate::table::Table;

/// Smallest variance 1 - e^{-2s} used in the OU kernel.
pub const OU_VARIANCE_FLOOR: f64 = 1e-12;

/// Law of the initial position: u(x, 0) is its density.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    PointMass(f64),
    Gaussian { mean: f64, sd: f64 },
    Tabulated(TabulatedDensity),
}

impl InitialLaw {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return domain(format!("Gaussian initial law needs finite mean and sd > 0, got {mean}, {sd}"));
        }
        Ok(InitialLaw::Gaussian { mean, sd })
    }

    /// `point:X0`, `gaussian:MEAN:SD` or `table:PATH`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad initial law {s:?} (point:X0, gaussian:M:S, table:PATH)"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "point" => {
                let x0 = num(rest)?;
                if !x0.is_finite() {
                    return Err(bad());
                }
                Ok(InitialLaw::PointMass(x0))
            }
            "gaussian" => {
                let (m, sd) = rest.split_once(':').ok_or_else(bad)?;
                Self::gaussian(num(m)?, num(sd)?)
            }
            "table" => Ok(InitialLaw::Tabulated(TabulatedDensity::read_csv(rest)?)),
            _ => Err(bad()),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            InitialLaw::PointMass(x0) => format!("point:{x0}"),
            InitialLaw::Gaussian { mean, sd } => format!("gaussian:{mean}:{sd}"),
            InitialLaw::Tabulated(t) => format!("table({} points)", t.xs.len()),
        }
    }
}

impl Sampler for InitialLaw {
    type Output = f64;

    #[inline]
    fn draw(&self, rng: &mut RngStream) -> f64 {
        match self {
            InitialLaw::PointMass(x0) => *x0,
            InitialLaw::Gaussian { mean, sd } => mean + sd * rng.standard_normal(),
            InitialLaw::Tabulated(t) => t.inverse_cdf(rng.open_uniform()),
        }
    }
}

/// Density given on a grid; sampled by inverting the piecewise-linear CDF
/// of its trapezoid masses.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(xs: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != density.len() {
            return domain("tabulated density needs at least two (x, density) pairs");
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("tabulated x values must be strictly increasing");
        }
        if density.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return domain("tabulated density values must be finite and non-negative");
        }
        let mut cdf = vec![0.0];
        for i in 1..xs.len() {
            let m = 0.5 * (xs[i] - xs[i - 1]) * (density[i] + density[i - 1]);
            cdf.push(cdf[i - 1] + m);
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) {
            return domain("tabulated density has zero mass");
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { xs, cdf })
    }

    /// Two-column CSV (x, density) with a header line.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let t = Table::read_path(path)?;
        if t.columns.len() < 2 {
            return Err(Error::Parse("tabulated density needs two columns".into()));
        }
        Self::new(
            t.rows.iter().map(|r| r[0]).collect(),
            t.rows.iter().map(|r| r[1]).collect(),
        )
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.xs.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.xs[i - 1] + w * (self.xs[i] - self.xs[i - 1])
    }
}

/// Fractional diffusion ∂_t^β u = D_x^{α,0} u with initial law `initial`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatSpec {
    pub order: FracOrder,
    pub initial: InitialLaw,
}

impl HeatSpec {
    pub fn new(order: FracOrder, initial: InitialLaw) -> Result<Self> {
        order.require_symmetric()?;
        Ok(Self { order, initial })
    }

    /// Green function: point source at the origin.
    pub fn green(beta: f64, alpha: f64) -> Result<Self> {
        Self::new(FracOrder::symmetric(beta, alpha)?, InitialLaw::PointMass(0.0))
    }

    fn closed_form(&self) -> Option<f64> {
        match self.initial {
            InitialLaw::PointMass(x0) if self.order.alpha == 2.0 && self.order.beta == 1.0 => Some(x0),
            _ => None,
        }
    }
}

/// Fractional wave equation with speed `k` and initial profile `profile`.
#[derive(Clone)]
pub struct WaveSpec {
    pub k: f64,
    pub beta: f64,
    pub profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for WaveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveSpec")
            .field("k", &self.k)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

impl WaveSpec {
    pub fn new(k: f64, beta: f64, profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return domain(format!("wave speed must be positive, got {k}"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return domain(format!("beta must lie in (0, 1], got {beta}"));
        }
        Ok(Self { k, beta, profile })
    }
}

/// Fractional OU Fokker–Planck equation started from `initial`.
#[derive(Debug, Clone, PartialEq)]
pub struct FokkerPlanckSpec {
    pub beta: f64,
    pub initial: InitialLaw,
}

impl FokkerPlanckSpec {
    pub fn new(beta: f64, initial: InitialLaw) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return domain(format!("beta must lie in (0, 1], got {beta}"));
        }
        Ok(Self { beta, initial })
    }
}

fn check_t_grid(t_grid: &GridSpec) -> Result<()> {
    if !(t_grid.start > 0.0) {
        return domain(format!("times must be positive, got t = {}", t_grid.start));
    }
    Ok(())
}

/// Column-by-column surface of E[value(draw, x)], the draw law depending on t.
fn surface<S, L, V>(x_grid: &GridSpec, t_grid: &GridSpec, run: McRun, law_at: L, value: V) -> Result<SolutionSurface>
where
    S: Sampler,
    L: Fn(f64) -> Result<S> + Sync,
    V: Fn(S::Output, f64) -> f64 + Sync,
{
    check_t_grid(t_grid)?;
    let xs = x_grid.points();
    let columns: Vec<Vec<Estimate>> = (0..t_grid.count)
        .into_par_iter()
        .map(|j| {
            let sampler = law_at(t_grid.point_at(j))?;
            expect_vec_sharded_at(
                run.master_seed,
                (j as u64) << 32,
                &sampler,
                |d, out: &mut [f64]| {
                    for (o, x) in out.iter_mut().zip(&xs) {
                        *o = value(d, *x);
                    }
                },
                xs.len(),
                run.n,
                run.shards,
            )
        })
        .collect::<Result<_>>()?;
    SolutionSurface::from_columns(*x_grid, *t_grid, columns)
}

fn point_grids(x: f64, t: f64) -> Result<(GridSpec, GridSpec)> {
    Ok((GridSpec::point(x)?, GridSpec::point(t)?))
}

/// u(x, t) = E[ heat_kernel(x - Y, τ) ], τ = X_{α/2} T_β(t)^{2/α}, Y from the
/// initial law. With a point source and (α, β) = (2, 1) the Gaussian kernel
/// is returned exactly.
pub fn heat_solution(spec: &HeatSpec, x: f64, t: f64, run: McRun) -> Result<Estimate> {
    let (xg, tg) = point_grids(x, t)?;
    Ok(heat_surface(spec, &xg, &tg, run)?.get(0, 0))
}

pub fn heat_surface(spec: &HeatSpec, x_grid: &GridSpec, t_grid: &GridSpec, run: McRun) -> Result<SolutionSurface> {
    spec.order.require_symmetric()?;
    let FracOrder { beta, alpha, .. } = spec.order;
    if let Some(x0) = spec.closed_form() {
        check_t_grid(t_grid)?;
        let mut values = Vec::with_capacity(x_grid.count * t_grid.count);
        for x in x_grid.points() {
            for t in t_grid.points() {
                values.push(Estimate::exact(heat_kernel_unchecked(x - x0, t), run.n));
            }
        }
        return SolutionSurface::new(*x_grid, *t_grid, values);
    }
    let initial = &spec.initial;
    surface(
        x_grid,
        t_grid,
        run,
        |t| Ok((Law::subordinated_inverse(alpha, beta, t)?, initial.clone())),
        |(tau, y), x| heat_kernel_unchecked(x - y, tau),
    )
}

/// Position X_{α,β}(t) = √(2τ) Z of the subordinated Brownian motion
/// whose density is the Green function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatPosition(Law);

impl HeatPosition {
    pub fn new(order: FracOrder, t: f64) -> Result<Self> {
        order.require_symmetric()?;
        Ok(Self(Law::subordinated_inverse(order.alpha, order.beta, t)?))
    }
}

impl Sampler for HeatPosition {
    type Output = f64;

    #[inline]
    fn draw(&self, rng: &mut RngStream) -> f64 {
        let tau = self.0.draw(rng);
        (2.0 * tau).sqrt() * rng.standard_normal()
    }
}

/// E|X_{α,β}(t)|^s = t^{sβ/α} Γ(1-s/α)Γ(1+s/α)Γ(1+s) / (Γ(1-s/2)Γ(1+s/2)Γ(1+sβ/α)),
/// for -min(1, α) < s < α.
pub fn frac_abs_moment(order: FracOrder, s: f64, t: f64) -> Result<f64> {
    order.require_symmetric()?;
    let FracOrder { beta, alpha, .. } = order;
    if !(s > -alpha.min(1.0) && s < alpha) {
        return domain(format!("s must lie in ({}, {alpha}), got {s}", -alpha.min(1.0)));
    }
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let r = s / alpha;
    Ok(t.powf(s * beta / alpha) * gamma(1.0 - r) * gamma(1.0 + r) * gamma(1.0 + s)
        / (gamma(1.0 - 0.5 * s) * gamma(1.0 + 0.5 * s) * gamma(1.0 + s * beta / alpha)))
}

/// Exponent sβ/α of t in E|X|^s; at s = 2 it separates subdiffusion
/// (2β/α < 1) from superdiffusion (2β/α > 1).
pub fn moment_growth_exponent(order: FracOrder, s: f64) -> f64 {
    s * order.beta / order.alpha
}

/// u_β(x, t) = E[(f(x - kS) + f(x + kS)) / 2], S = T_β(t).
pub fn wave_solution(spec: &WaveSpec, x: f64, t: f64, run: McRun) -> Result<Estimate> {
    let (xg, tg) = point_grids(x, t)?;
    Ok(wave_surface(spec, &xg, &tg, run)?.get(0, 0))
}

pub fn wave_surface(spec: &WaveSpec, x_grid: &GridSpec, t_grid: &GridSpec, run: McRun) -> Result<SolutionSurface> {
    let (k, f) = (spec.k, &spec.profile);
    surface(
        x_grid,
        t_grid,
        run,
        |t| Law::inverse_time(spec.beta, t),
        |s, x| 0.5 * (f(x - k * s) + f(x + k * s)),
    )
}

/// Transition density of the OU process dX = -X ds + √2 dW from y to x
/// in time s, variance floored at [`OU_VARIANCE_FLOOR`].
#[inline]
pub fn ou_kernel(x: f64, s: f64, y: f64) -> f64 {
    let v = (-(-2.0 * s).exp_m1()).max(OU_VARIANCE_FLOOR);
    let d = x - (-s).exp() * y;
    (-d * d / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
}

/// p_β(x, t) = E[K_OU(x, S | Y)], S = T_β(t), Y from the initial law.
pub fn fokker_planck_solution(spec: &FokkerPlanckSpec, x: f64, t: f64, run: McRun) -> Result<Estimate> {
    let (xg, tg) = point_grids(x, t)?;
    Ok(fokker_planck_surface(spec, &xg, &tg, run)?.get(0, 0))
}

pub fn fokker_planck_surface(
    spec: &FokkerPlanckSpec,
    x_grid: &GridSpec,
    t_grid: &GridSpec,
    run: McRun,
) -> Result<SolutionSurface> {
    let initial = &spec.initial;
    surface(
        x_grid,
        t_grid,
        run,
        |t| Ok((Law::inverse_time(spec.beta, t)?, initial.clone())),
        |(s, y), x| ou_kernel(x, s, y),
    )
}
