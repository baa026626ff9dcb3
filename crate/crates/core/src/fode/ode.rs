//! Dormand–Prince 5(4) with step-size control and cubic Hermite dense output.
//!
//! Steps are never shortened to land on a requested end point, so a path
//! integrated to `x₁` and later extended to `x₂` is identical to one
//! integrated to `x₂` in a single call.

use crate::error::{domain, Error, Result};

/// Error control for the embedded pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step, relative to max(1, |x|).
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            min_step: 1e-13,
            max_steps: 20_000_000,
        }
    }
}

impl OdeTolerances {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        let t = Self {
            rtol,
            atol,
            ..Self::default()
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.min_step > 0.0) {
            return domain("ODE tolerances must be positive");
        }
        Ok(())
    }
}

/// Solution of the first component on a node grid, with slopes for
/// Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct OdePath {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl OdePath {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Interpolation order of [`eval`](Self::eval).
    pub fn interpolation_order(&self) -> usize {
        4
    }

    fn out_of_range(&self, x: f64) -> Error {
        Error::OutOfRange {
            x,
            lo: self.start(),
            hi: self.end(),
        }
    }

    #[inline]
    fn hermite(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }

    /// Value at `x`; node values are returned exactly.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= self.start() && x <= self.end()) {
            return Err(self.out_of_range(x));
        }
        let i = self.nodes.partition_point(|&n| n <= x);
        if i > 0 && self.nodes[i - 1] == x {
            return Ok(self.values[i - 1]);
        }
        Ok(self.hermite(i - 1, x))
    }

    /// Evaluates at ascending `xs` in one pass.
    pub fn eval_sorted(&self, xs: &[f64], mut each: impl FnMut(usize, f64) -> Result<()>) -> Result<()> {
        let mut seg = 0;
        let last = self.nodes.len() - 1;
        for (k, &x) in xs.iter().enumerate() {
            if !(x >= self.start() && x <= self.end()) {
                return Err(self.out_of_range(x));
            }
            while seg < last && self.nodes[seg + 1] <= x {
                seg += 1;
            }
            let v = if self.nodes[seg] == x {
                self.values[seg]
            } else {
                self.hermite(seg, x)
            };
            each(k, v)?;
        }
        Ok(())
    }
}

/// Value of `path` at `x` ∈ [start, end].
pub fn eval_path(path: &OdePath, x: f64) -> Result<f64> {
    path.eval(x)
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrator state that can keep extending its path.
pub struct Dopri5<F> {
    f: F,
    tol: OdeTolerances,
    x: f64,
    y: Vec<f64>,
    dy: Vec<f64>,
    h: f64,
    steps: usize,
    path: OdePath,
}

impl<F: Fn(f64, &[f64], &mut [f64])> Dopri5<F> {
    pub fn new(f: F, x0: f64, y0: &[f64], tol: OdeTolerances) -> Result<Self> {
        tol.validate()?;
        if y0.is_empty() {
            return domain("ODE state must have at least one component");
        }
        if y0.iter().any(|v| !v.is_finite()) || !x0.is_finite() {
            return domain("initial state must be finite");
        }
        let mut dy = vec![0.0; y0.len()];
        f(x0, y0, &mut dy);
        let h = initial_step(&f, x0, y0, &dy, &tol);
        let path = OdePath {
            nodes: vec![x0],
            values: vec![y0[0]],
            slopes: vec![dy[0]],
        };
        Ok(Self {
            f,
            tol,
            x: x0,
            y: y0.to_vec(),
            dy,
            h,
            steps: 0,
            path,
        })
    }

    pub fn path(&self) -> &OdePath {
        &self.path
    }

    pub fn into_path(self) -> OdePath {
        self.path
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.tol.atol + self.tol.rtol * a.abs().max(b.abs())
    }

    /// Integrates until the path end reaches at least `x_target`.
    pub fn advance_to(&mut self, x_target: f64) -> Result<()> {
        let dim = self.y.len();
        let mut k = vec![vec![0.0; dim]; 7];
        let mut tmp = vec![0.0; dim];
        let mut y_new = vec![0.0; dim];
        while self.x < x_target {
            if self.steps >= self.tol.max_steps {
                return Err(Error::Unsupported(format!(
                    "ODE step budget {} exhausted at x = {}",
                    self.tol.max_steps, self.x
                )));
            }
            let h = self.h;
            if h < self.tol.min_step * self.x.abs().max(1.0) || !h.is_finite() {
                return Err(Error::StepSizeUnderflow { x: self.x });
            }
            k[0].copy_from_slice(&self.dy);
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = self.y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += h * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                (self.f)(self.x + C[s] * h, &tmp, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&tmp);
                }
            }
            let mut err = 0.0;
            for i in 0..dim {
                let mut e = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    e += E[s] * ks[i];
                }
                let r = h * e / self.scale(self.y[i], y_new[i]);
                err += r * r;
            }
            let err = (err / dim as f64).sqrt();
            self.steps += 1;
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                self.h = 0.2 * h;
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                self.x += h;
                self.y.copy_from_slice(&y_new);
                self.dy.copy_from_slice(&k[6]);
                self.path.nodes.push(self.x);
                self.path.values.push(self.y[0]);
                self.path.slopes.push(self.dy[0]);
                self.h = h * factor;
            } else {
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}

fn initial_step<F: Fn(f64, &[f64], &mut [f64])>(
    f: &F,
    x0: f64,
    y0: &[f64],
    f0: &[f64],
    tol: &OdeTolerances,
) -> f64 {
    let sc: Vec<f64> = y0.iter().map(|v| tol.atol + tol.rtol * v.abs()).collect();
    let norm = |v: &[f64]| {
        (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(x0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / m).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Integrates `y' = f(x, y)` from `x0` until the path end reaches `x_max`
/// and returns the path of the first component.
pub fn solve_ode<F: Fn(f64, &[f64], &mut [f64])>(
    f: F,
    x0: f64,
    y0: &[f64],
    x_max: f64,
    tol: OdeTolerances,
) -> Result<OdePath> {
    let mut s = Dopri5::new(f, x0, y0, tol)?;
    s.advance_to(x_max)?;
    Ok(s.into_path())
}
