//! Monte Carlo expectations with standard errors, deterministic sharding,
//! replicated sweeps over a time grid, and solution surfaces.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::sampler::{RngStream, Sampler};
use crate::table::Table;

/// Mean, standard error and sample count of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Estimate {
    /// An exactly known value (zero standard error).
    pub fn exact(value: f64, n: usize) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            n,
        }
    }

    /// |mean - reference| measured in standard errors; 0 when both the
    /// difference and the error vanish.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.mean - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn within(&self, reference: f64, k: f64) -> bool {
        self.z_score(reference) <= k
    }
}

/// Sample size, seed and worker split of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McRun {
    pub n: usize,
    pub master_seed: u64,
    pub shards: usize,
}

impl McRun {
    /// One shard.
    pub fn new(n: usize, master_seed: u64) -> Self {
        Self {
            n,
            master_seed,
            shards: 1,
        }
    }

    pub fn with_shards(self, shards: usize) -> Self {
        Self { shards, ..self }
    }
}

/// Streaming mean and sum of squared deviations (Welford), mergeable
/// (Chan et al.) so that shards combine exactly in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if other.n == 0 {
            return *self;
        }
        if self.n == 0 {
            return *other;
        }
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        let d = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn estimate(&self) -> Estimate {
        let std_error = if self.n < 2 {
            f64::NAN
        } else {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        };
        Estimate {
            mean: self.mean,
            std_error,
            n: self.n,
        }
    }
}

/// Pairwise reduction in index order, independent of thread scheduling.
pub fn tree_merge(parts: &[Accumulator]) -> Accumulator {
    match parts.len() {
        0 => Accumulator::new(),
        1 => parts[0],
        len => {
            let (l, r) = parts.split_at(len / 2);
            tree_merge(l).merge(&tree_merge(r))
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("need at least 2 draws for a standard error, got {n}"));
    }
    Ok(())
}

/// Accumulates `dim` integrands over `n` draws from one stream. `offset`
/// is the global index of the first draw, used in error reports.
fn accumulate<S, F>(
    rng: &mut RngStream,
    sampler: &S,
    integrand: &F,
    dim: usize,
    n: usize,
    offset: usize,
) -> Result<Vec<Accumulator>>
where
    S: Sampler,
    F: Fn(S::Output, &mut [f64]) + ?Sized,
{
    let mut acc = vec![Accumulator::new(); dim];
    let mut buf = vec![0.0; dim];
    for i in 0..n {
        let draw = sampler.draw(rng);
        integrand(draw, &mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: offset + i,
                    draw: format!("{draw:?}"),
                    value: *v,
                });
            }
            a.push(*v);
        }
    }
    Ok(acc)
}

/// E[f(X)] over `n` fresh draws from `stream`.
pub fn expect<S, F>(stream: &mut RngStream, sampler: &S, integrand: F, n: usize) -> Result<Estimate>
where
    S: Sampler,
    F: Fn(S::Output) -> f64,
{
    check_n(n)?;
    let acc = accumulate(stream, sampler, &|d, out: &mut [f64]| out[0] = integrand(d), 1, n, 0)?;
    Ok(acc[0].estimate())
}

/// Vector of expectations E[f_j(X)], j < dim, sharing the same draws.
pub fn expect_vec<S, F>(
    stream: &mut RngStream,
    sampler: &S,
    integrand: F,
    dim: usize,
    n: usize,
) -> Result<Vec<Estimate>>
where
    S: Sampler,
    F: Fn(S::Output, &mut [f64]),
{
    check_n(n)?;
    let acc = accumulate(stream, sampler, &integrand, dim, n, 0)?;
    Ok(acc.iter().map(Accumulator::estimate).collect())
}

/// Shard sizes: `n / shards` each, remainder on the last.
fn shard_sizes(n: usize, shards: usize) -> Vec<usize> {
    let base = n / shards;
    let mut sizes = vec![base; shards];
    sizes[shards - 1] += n - base * shards;
    sizes
}

/// Sharded vector expectation. Shard `i` draws from stream
/// `stream_base + i`; results merge pairwise in shard order.
pub fn expect_vec_sharded_at<S, F>(
    master_seed: u64,
    stream_base: u64,
    sampler: &S,
    integrand: F,
    dim: usize,
    n: usize,
    shards: usize,
) -> Result<Vec<Estimate>>
where
    S: Sampler,
    F: Fn(S::Output, &mut [f64]) + Sync,
{
    check_n(n)?;
    if shards == 0 {
        return domain("shard count must be at least 1");
    }
    let sizes = shard_sizes(n, shards);
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let parts: Vec<Vec<Accumulator>> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(master_seed, stream_base + i as u64);
            accumulate(&mut rng, sampler, &integrand, dim, sizes[i], offsets[i])
        })
        .collect::<Result<_>>()?;
    Ok((0..dim)
        .map(|j| {
            let column: Vec<Accumulator> = parts.iter().map(|p| p[j]).collect();
            tree_merge(&column).estimate()
        })
        .collect())
}

/// E[f(X)] split over `shards` streams `(master_seed, 0..shards)`. The
/// result depends only on `(master_seed, shards, n)`, not on scheduling;
/// one shard reproduces [`expect`] on stream `(master_seed, 0)`.
pub fn expect_sharded<S, F>(
    master_seed: u64,
    sampler: &S,
    integrand: F,
    n: usize,
    shards: usize,
) -> Result<Estimate>
where
    S: Sampler,
    F: Fn(S::Output) -> f64 + Sync,
{
    let v = expect_vec_sharded_at(
        master_seed,
        0,
        sampler,
        |d, out: &mut [f64]| out[0] = integrand(d),
        1,
        n,
        shards,
    )?;
    Ok(v[0])
}

/// `n` draws split over `shards` streams `(master_seed, 0..shards)` and
/// concatenated in shard order.
pub fn draw_sharded<S: Sampler>(master_seed: u64, sampler: &S, n: usize, shards: usize) -> Result<Vec<S::Output>> {
    if shards == 0 {
        return domain("shard count must be at least 1");
    }
    let parts: Vec<Vec<S::Output>> = shard_sizes(n, shards)
        .into_par_iter()
        .enumerate()
        .map(|(i, size)| {
            let mut rng = RngStream::new(master_seed, i as u64);
            (0..size).map(|_| sampler.draw(&mut rng)).collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Uniform grid with both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    /// `start < stop` for `count ≥ 2`; a one-point grid needs `start == stop`
    /// or uses `start`.
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) {
            return domain("grid endpoints must be finite");
        }
        if count == 0 {
            return domain("grid needs at least one point");
        }
        if count > 1 && !(start < stop) {
            return domain(format!("grid needs start < stop, got {start}:{stop}"));
        }
        if count == 1 && stop < start {
            return domain(format!("grid needs start <= stop, got {start}:{stop}"));
        }
        Ok(Self { start, stop, count })
    }

    /// Single point grid.
    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x, 1)
    }

    pub fn point_at(&self, i: usize) -> f64 {
        if i == 0 || self.count == 1 {
            self.start
        } else if i + 1 == self.count {
            self.stop
        } else {
            self.start + (self.stop - self.start) * (i as f64 / (self.count - 1) as f64)
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point_at(i)).collect()
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// `start:stop:count`, or a single number for a one-point grid.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad grid value {p:?} in {s:?}")))
        };
        match parts.as_slice() {
            [x] => Self::point(num(x)?),
            [a, b, n] => {
                let count = n
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad grid count {n:?} in {s:?}")))?;
                Self::new(num(a)?, num(b)?, count)
            }
            _ => Err(Error::Parse(format!(
                "grid must be start:stop:count or a single value, got {s:?}"
            ))),
        }
    }
}

/// One grid point of a replicated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    /// Mean of the replicate means.
    pub mean: f64,
    /// Standard error of that mean, sqrt(Σ se_r²) / R.
    pub std_error: f64,
    /// Draws per replicate.
    pub n: usize,
    pub repeats: usize,
    pub lo_envelope: f64,
    pub hi_envelope: f64,
    pub replicates: Vec<Estimate>,
}

impl SweepRow {
    pub fn pooled(&self) -> Estimate {
        Estimate {
            mean: self.mean,
            std_error: self.std_error,
            n: self.n * self.repeats,
        }
    }
}

/// Stream id of replicate `rep` at grid point `grid_idx`.
pub fn sweep_stream_id(grid_idx: usize, rep: usize) -> u64 {
    ((grid_idx as u64) << 32) | rep as u64
}

/// Runs `estimator(t, stream)` `repeats` times at every grid point, each
/// replicate on its own stream [`sweep_stream_id`] under `master_seed`.
pub fn sweep<F>(master_seed: u64, t_grid: &GridSpec, estimator: F, repeats: usize) -> Result<Vec<SweepRow>>
where
    F: Fn(f64, &mut RngStream) -> Result<Estimate> + Sync,
{
    if repeats == 0 {
        return domain("repeats must be at least 1");
    }
    let cells: Vec<(usize, usize)> = (0..t_grid.count)
        .flat_map(|g| (0..repeats).map(move |r| (g, r)))
        .collect();
    let results: Vec<Estimate> = cells
        .par_iter()
        .map(|&(g, r)| {
            let mut rng = RngStream::new(master_seed, sweep_stream_id(g, r));
            estimator(t_grid.point_at(g), &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(results
        .chunks(repeats)
        .enumerate()
        .map(|(g, reps)| {
            let r = reps.len() as f64;
            let mean = reps.iter().map(|e| e.mean).sum::<f64>() / r;
            let std_error = reps.iter().map(|e| e.std_error * e.std_error).sum::<f64>().sqrt() / r;
            let lo = reps.iter().map(|e| e.mean).fold(f64::INFINITY, f64::min);
            let hi = reps.iter().map(|e| e.mean).fold(f64::NEG_INFINITY, f64::max);
            SweepRow {
                t: t_grid.point_at(g),
                mean,
                std_error,
                n: reps[0].n,
                repeats: reps.len(),
                lo_envelope: lo,
                hi_envelope: hi,
                replicates: reps.to_vec(),
            }
        })
        .collect())
}

/// Sweep rows as a table with columns
/// t, mean, std_error, n, repeats, lo_envelope, hi_envelope.
pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(["t", "mean", "std_error", "n", "repeats", "lo_envelope", "hi_envelope"]);
    for r in rows {
        t.rows.push(vec![
            r.t,
            r.mean,
            r.std_error,
            r.n as f64,
            r.repeats as f64,
            r.lo_envelope,
            r.hi_envelope,
        ]);
    }
    t
}

/// Estimates on an (x, t) grid, stored x-major: `values[ix * t_count + it]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSurface {
    pub x_grid: GridSpec,
    pub t_grid: GridSpec,
    pub values: Vec<Estimate>,
}

impl SolutionSurface {
    pub fn new(x_grid: GridSpec, t_grid: GridSpec, values: Vec<Estimate>) -> Result<Self> {
        if values.len() != x_grid.count * t_grid.count {
            return domain(format!(
                "surface needs {} values, got {}",
                x_grid.count * t_grid.count,
                values.len()
            ));
        }
        Ok(Self {
            x_grid,
            t_grid,
            values,
        })
    }

    /// Assembles a surface from per-t columns, each holding one estimate per x.
    pub fn from_columns(x_grid: GridSpec, t_grid: GridSpec, columns: Vec<Vec<Estimate>>) -> Result<Self> {
        if columns.len() != t_grid.count || columns.iter().any(|c| c.len() != x_grid.count) {
            return domain("surface columns do not match the grids");
        }
        let mut values = Vec::with_capacity(x_grid.count * t_grid.count);
        for ix in 0..x_grid.count {
            for col in &columns {
                values.push(col[ix]);
            }
        }
        Self::new(x_grid, t_grid, values)
    }

    pub fn get(&self, ix: usize, it: usize) -> Estimate {
        self.values[ix * self.t_grid.count + it]
    }

    /// Column of estimates at fixed t index, ordered by x.
    pub fn column(&self, it: usize) -> Vec<Estimate> {
        (0..self.x_grid.count).map(|ix| self.get(ix, it)).collect()
    }

    /// Trapezoid rule over x of the means in column `it`.
    pub fn mass(&self, it: usize) -> f64 {
        let xs = self.x_grid.points();
        let col = self.column(it);
        xs.windows(2)
            .zip(col.windows(2))
            .map(|(x, e)| 0.5 * (x[1] - x[0]) * (e[0].mean + e[1].mean))
            .sum()
    }

    /// Table with columns x, t, mean, std_error, n.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["x", "t", "mean", "std_error", "n"])
            .with_meta("x_grid", format_grid(&self.x_grid))
            .with_meta("t_grid", format_grid(&self.t_grid));
        let xs = self.x_grid.points();
        let ts = self.t_grid.points();
        for (ix, x) in xs.iter().enumerate() {
            for (it, tv) in ts.iter().enumerate() {
                let e = self.get(ix, it);
                t.rows.push(vec![*x, *tv, e.mean, e.std_error, e.n as f64]);
            }
        }
        t
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let grid = |k: &str| -> Result<GridSpec> {
            table
                .meta_value(k)
                .ok_or_else(|| Error::Parse(format!("missing `{k}` header line")))?
                .parse()
        };
        let (x_grid, t_grid) = (grid("x_grid")?, grid("t_grid")?);
        let col = |k: &str| {
            table
                .column(k)
                .ok_or_else(|| Error::Parse(format!("missing `{k}` column")))
        };
        let (mean, se, n) = (col("mean")?, col("std_error")?, col("n")?);
        let values = (0..mean.len())
            .map(|i| Estimate {
                mean: mean[i],
                std_error: se[i],
                n: n[i] as usize,
            })
            .collect();
        Self::new(x_grid, t_grid, values)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_table().write_path(path)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table(&Table::read_path(path)?)
    }
}

/// `start:stop:count` with lossless numbers.
pub fn format_grid(g: &GridSpec) -> String {
    use crate::table::format_f64;
    format!("{}:{}:{}", format_f64(g.start), format_f64(g.stop), g.count)
}
