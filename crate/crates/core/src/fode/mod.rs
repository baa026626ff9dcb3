//! Linear fractional ODEs with Caputo derivatives,
//!
//! Σ_{k=1}^{n} a_k D^{k+β-1} y(t) + a_{n+1} y(t) = F_β(t),
//!
//! solved as y(t) = E[z(T_β(t))] where z solves the classical equation
//! Σ a_k z^{(k)} + a_{n+1} z = F with the same initial values.

mod ode;

use std::fmt;
use std::sync::{Arc, RwLock};

pub use ode::{eval_path, solve_ode, Dopri5, OdePath, OdeTolerances};

use crate::error::{domain, Error, Result};
use crate::mc::{sweep, Accumulator, Estimate, GridSpec, SweepRow};
use crate::sampler::{Law, RngStream, Sampler};
use crate::special::{frac_sin, gamma, ml};

/// Right-hand side F of the classical equation.
#[derive(Clone, Default)]
pub enum Forcing {
    #[default]
    None,
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Forcing {
    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        match self {
            Forcing::None => 0.0,
            Forcing::Constant(c) => *c,
            Forcing::Function(f) => f(x),
        }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::None => write!(f, "None"),
            Forcing::Constant(c) => write!(f, "Constant({c})"),
            Forcing::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Coefficients a_1..a_{n+1}, initial values y_0..y_{n-1}, order β and
/// classical forcing F.
#[derive(Debug, Clone)]
pub struct LinearFodeSpec {
    pub coefficients: Vec<f64>,
    pub initial: Vec<f64>,
    pub beta: f64,
    pub forcing: Forcing,
}

impl LinearFodeSpec {
    pub fn new(coefficients: Vec<f64>, initial: Vec<f64>, beta: f64, forcing: Forcing) -> Result<Self> {
        let s = Self {
            coefficients,
            initial,
            beta,
            forcing,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        if n == 0 {
            return domain("need at least two coefficients a_1, a_2");
        }
        if self.coefficients.iter().any(|a| !a.is_finite()) {
            return domain("coefficients must be finite");
        }
        if self.coefficients[n - 1] == 0.0 {
            return domain(format!("leading coefficient a_{n} must be non-zero"));
        }
        if self.initial.len() != n {
            return domain(format!(
                "order {n} equation needs {n} initial values, got {}",
                self.initial.len()
            ));
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return domain("initial values must be finite");
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return domain(format!("beta must lie in (0, 1], got {}", self.beta));
        }
        if let Forcing::Constant(c) = self.forcing {
            if !c.is_finite() {
                return domain("forcing constant must be finite");
            }
        }
        Ok(())
    }

    /// D^β y = -y, y(0) = 1.
    pub fn decay(beta: f64) -> Result<Self> {
        Self::new(vec![1.0, 1.0], vec![1.0], beta, Forcing::None)
    }

    /// D^β y = y, y(0) = 1.
    pub fn growth(beta: f64) -> Result<Self> {
        Self::new(vec![1.0, -1.0], vec![1.0], beta, Forcing::None)
    }

    /// D^{β+1} y = -y, y(0) = 0, y'(0) = 1.
    pub fn oscillator(beta: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0], beta, Forcing::None)
    }

    /// D^β y = 2, y(0) = 1.
    pub fn constant(beta: f64) -> Result<Self> {
        Self::new(vec![1.0, 0.0], vec![1.0], beta, Forcing::Constant(2.0))
    }

    pub fn builtin(name: &str, beta: f64) -> Result<Self> {
        match name {
            "decay" => Self::decay(beta),
            "growth" => Self::growth(beta),
            "oscillator" => Self::oscillator(beta),
            "constant" => Self::constant(beta),
            other => Err(Error::Parse(format!(
                "unknown built-in equation {other:?} (decay, growth, oscillator, constant)"
            ))),
        }
    }

    /// Parses `key = value` lines (`#` starts a comment). Keys:
    /// `builtin`, `beta`, `coefficients`, `initial`, `forcing`. A builtin
    /// supplies defaults that the other keys override; `beta_default` is
    /// used when the text has no `beta`.
    pub fn parse(text: &str, beta_default: Option<f64>) -> Result<Self> {
        let mut builtin = None;
        let mut beta = beta_default;
        let mut coefficients = None;
        let mut initial = None;
        let mut forcing = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what} {v:?}", lineno + 1));
            match k {
                "builtin" => builtin = Some(v.to_string()),
                "beta" => beta = Some(v.parse().map_err(|_| bad("beta"))?),
                "coefficients" => coefficients = Some(parse_list(v).map_err(|_| bad("coefficient list"))?),
                "initial" => initial = Some(parse_list(v).map_err(|_| bad("initial values"))?),
                "forcing" => forcing = Some(v.parse::<f64>().map_err(|_| bad("forcing constant"))?),
                other => {
                    return Err(Error::Parse(format!("line {}: unknown key {other:?}", lineno + 1)))
                }
            }
        }
        let beta = beta.ok_or_else(|| Error::Parse("missing `beta`".into()))?;
        let mut spec = match builtin {
            Some(name) => Self::builtin(&name, beta)?,
            None => Self {
                coefficients: Vec::new(),
                initial: Vec::new(),
                beta,
                forcing: Forcing::None,
            },
        };
        if let Some(c) = coefficients {
            spec.coefficients = c;
        }
        if let Some(i) = initial {
            spec.initial = i;
        }
        if let Some(f) = forcing {
            spec.forcing = if f == 0.0 { Forcing::None } else { Forcing::Constant(f) };
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Closed form of the fractional solution when one is known:
    /// first order with constant forcing, or second order
    /// a_2 y^{(β+1)} + a_3 y = 0 with a_3/a_2 > 0.
    pub fn exact(&self, t: f64) -> Option<f64> {
        let a = &self.coefficients;
        let b = self.beta;
        let c = match self.forcing {
            Forcing::None => 0.0,
            Forcing::Constant(c) => c,
            Forcing::Function(_) => return None,
        };
        let tb = t.powf(b);
        match self.order() {
            1 => {
                let y0 = self.initial[0];
                if a[1] == 0.0 {
                    Some(y0 + c / a[0] * tb / gamma(b + 1.0))
                } else {
                    let steady = c / a[1];
                    let m = ml(b, 1.0, -a[1] / a[0] * tb).ok()?;
                    Some(steady + (y0 - steady) * m)
                }
            }
            2 if a[0] == 0.0 && c == 0.0 && a[2] / a[1] > 0.0 => {
                let w = (a[2] / a[1]).sqrt();
                let cos = ml(2.0 * b, 1.0, -w * w * tb * tb).ok()?;
                let sin = if t == 0.0 {
                    0.0
                } else if w == 1.0 {
                    frac_sin(b, t).ok()?
                } else {
                    tb * ml(2.0 * b, b + 1.0, -w * w * tb * tb).ok()?
                };
                Some(self.initial[0] * cos + self.initial[1] * sin)
            }
            _ => None,
        }
    }

    fn companion(&self) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
        let n = self.order();
        let a = &self.coefficients;
        move |x, y, d| {
            let mut acc = self.forcing.at(x) - a[n] * y[0];
            for k in 1..n {
                acc -= a[k - 1] * y[k];
            }
            d[..n - 1].copy_from_slice(&y[1..n]);
            d[n - 1] = acc / a[n - 1];
        }
    }
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// Classical path z on [0, x_max] for the equation of `spec`.
pub fn solve_classical(spec: &LinearFodeSpec, x_max: f64, tol: OdeTolerances) -> Result<OdePath> {
    spec.validate()?;
    if !(x_max >= 0.0 && x_max.is_finite()) {
        return domain(format!("x_max must be finite and non-negative, got {x_max}"));
    }
    solve_ode(spec.companion(), 0.0, &spec.initial, x_max, tol)
}

/// Shared classical path that grows on demand while draws are averaged
/// over it.
pub struct FodeBridge {
    spec: LinearFodeSpec,
    tol: OdeTolerances,
    path: RwLock<Arc<OdePath>>,
}

/// Quantile of the drawn times that sets the first path horizon.
pub const HORIZON_QUANTILE: f64 = 0.9999;

impl FodeBridge {
    pub fn new(spec: LinearFodeSpec, tol: OdeTolerances) -> Result<Self> {
        let path = solve_classical(&spec, 0.0, tol)?;
        Ok(Self {
            spec,
            tol,
            path: RwLock::new(Arc::new(path)),
        })
    }

    pub fn spec(&self) -> &LinearFodeSpec {
        &self.spec
    }

    pub fn path(&self) -> Arc<OdePath> {
        self.path.read().unwrap().clone()
    }

    /// Makes the path reach `max`, first to `horizon` and then by doubling.
    fn cover(&self, horizon: f64, max: f64) -> Result<Arc<OdePath>> {
        let current = self.path();
        if current.end() >= max {
            return Ok(current);
        }
        let mut guard = self.path.write().unwrap();
        if guard.end() >= max {
            return Ok(guard.clone());
        }
        // Re-integrating from zero reproduces the existing prefix exactly.
        let mut solver = Dopri5::new(self.spec.companion(), 0.0, &self.spec.initial, self.tol)?;
        let mut target = horizon.max(guard.end()).max(f64::MIN_POSITIVE);
        solver.advance_to(target)?;
        while solver.path().end() < max {
            target *= 2.0;
            solver.advance_to(target)?;
        }
        *guard = Arc::new(solver.into_path());
        Ok(guard.clone())
    }

    /// E[z(T_β(t))] from `n` draws on `stream`.
    pub fn estimate(&self, t: f64, n: usize, stream: &mut RngStream) -> Result<Estimate> {
        if n < 2 {
            return domain(format!("need at least 2 draws, got {n}"));
        }
        let law = Law::inverse_time(self.spec.beta, t)?;
        let mut draws: Vec<f64> = (0..n).map(|_| law.draw(stream)).collect();
        draws.sort_by(f64::total_cmp);
        let q = draws[((HORIZON_QUANTILE * n as f64).ceil() as usize).clamp(1, n) - 1];
        let path = self.cover(q, draws[n - 1])?;
        let mut acc = Accumulator::new();
        path.eval_sorted(&draws, |k, v| {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: k,
                    draw: format!("{:?}", draws[k]),
                    value: v,
                });
            }
            acc.push(v);
            Ok(())
        })?;
        Ok(acc.estimate())
    }
}

/// Monte Carlo solution on `t_grid` with `n` draws per point. Grid point
/// `i` uses stream `(master_seed, i << 32)`.
pub fn solve_fode(spec: &LinearFodeSpec, t_grid: &GridSpec, n: usize, master_seed: u64) -> Result<Vec<(f64, Estimate)>> {
    solve_fode_with(spec, t_grid, n, master_seed, OdeTolerances::default())
}

pub fn solve_fode_with(
    spec: &LinearFodeSpec,
    t_grid: &GridSpec,
    n: usize,
    master_seed: u64,
    tol: OdeTolerances,
) -> Result<Vec<(f64, Estimate)>> {
    let rows = fode_sweep(spec, t_grid, n, 1, master_seed, tol)?;
    Ok(rows.into_iter().map(|r| (r.t, r.replicates[0])).collect())
}

/// Replicated version of [`solve_fode`].
pub fn fode_sweep(
    spec: &LinearFodeSpec,
    t_grid: &GridSpec,
    n: usize,
    repeats: usize,
    master_seed: u64,
    tol: OdeTolerances,
) -> Result<Vec<SweepRow>> {
    if t_grid.start < 0.0 {
        return domain("times must be non-negative");
    }
    let bridge = FodeBridge::new(spec.clone(), tol)?;
    sweep(master_seed, t_grid, |t, rng| bridge.estimate(t, n, rng), repeats)
}
