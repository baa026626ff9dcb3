use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use fracmc::fode::{fode_sweep, LinearFodeSpec, OdeTolerances};
use fracmc::green::{
    fokker_planck_surface, heat_surface, wave_surface, FokkerPlanckSpec, HeatPosition, HeatSpec, InitialLaw,
    WaveSpec,
};
use fracmc::mc::{draw_sharded, format_grid, GridSpec, McRun, SolutionSurface};
use fracmc::oracle::{green_fourier, laplace_check};
use fracmc::quad::QuadratureConfig;
use fracmc::sampler::Law;
use fracmc::special::FracOrder;
use fracmc::table::Table;
use fracmc::Error;

use crate::{LawName, OracleKind, Profile, RunArgs};

/// Logical partition of every Monte Carlo run. Fixed so that the output
/// does not depend on the number of worker threads.
pub const PARTITIONS: usize = 64;

fn mc_run(run: &RunArgs) -> McRun {
    McRun::new(run.n, run.seed).with_shards(PARTITIONS)
}

fn emit(mut table: Table, command: &str, params: &[(&str, String)], run: &RunArgs) -> Result<()> {
    let mut meta = vec![("command".to_string(), command.to_string())];
    meta.extend(params.iter().map(|(k, v)| (k.to_string(), v.clone())));
    meta.push(("n".into(), run.n.to_string()));
    meta.push(("seed".into(), run.seed.to_string()));
    meta.push(("shards".into(), run.shards.to_string()));
    meta.push(("partitions".into(), PARTITIONS.to_string()));
    meta.append(&mut table.meta);
    table.meta = meta;
    match &run.out {
        Some(path) => table
            .write_path(path)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write_to(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn need(v: Option<f64>, flag: &str, law: &str) -> Result<f64> {
    v.with_context(|| format!("--{flag} is required for law {law}"))
}

pub fn sample(law: LawName, alpha: Option<f64>, beta: Option<f64>, t: Option<f64>, run: &RunArgs) -> Result<()> {
    let name = law.to_possible_value().unwrap().get_name().to_string();
    let (values, params) = match law {
        LawName::StableOneside => {
            let a = need(alpha, "alpha", &name)?;
            let l = Law::stable(a)?;
            (draw_sharded(run.seed, &l, run.n, PARTITIONS)?, vec![("alpha", a)])
        }
        LawName::Subordinator => {
            let (a, t) = (need(alpha, "alpha", &name)?, need(t, "t", &name)?);
            let l = Law::subordinator(a, t)?;
            (draw_sharded(run.seed, &l, run.n, PARTITIONS)?, vec![("alpha", a), ("t", t)])
        }
        LawName::InverseSubordinator => {
            let (b, t) = (need(beta, "beta", &name)?, need(t, "t", &name)?);
            let l = Law::inverse_subordinator(b, t)?;
            (draw_sharded(run.seed, &l, run.n, PARTITIONS)?, vec![("beta", b), ("t", t)])
        }
        LawName::GaussianKernel => {
            let t = need(t, "t", &name)?;
            if !(t > 0.0 && t.is_finite()) {
                bail!("Gaussian kernel time must be positive, got {t}");
            }
            let l = HeatPosition::new(FracOrder::symmetric(1.0, 2.0)?, t)?;
            (draw_sharded(run.seed, &l, run.n, PARTITIONS)?, vec![("t", t)])
        }
    };
    let mut table = Table::new(["value"]);
    table.rows = values.into_iter().map(|v| vec![v]).collect();
    let mut p = vec![("law", name)];
    p.extend(params.into_iter().map(|(k, v)| (k, v.to_string())));
    emit(table, "sample", &p, run)
}

fn resolve_spec(spec: &str, beta: Option<f64>) -> Result<LinearFodeSpec> {
    if ["decay", "growth", "oscillator", "constant"].contains(&spec) {
        return Ok(LinearFodeSpec::builtin(spec, beta.unwrap_or(0.5))?);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        bail!("--spec {spec:?} is neither a built-in equation (decay, growth, oscillator, constant) nor a file");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut parsed = LinearFodeSpec::parse(&text, Some(0.5))?;
    if let Some(b) = beta {
        parsed.beta = b;
        parsed.validate()?;
    }
    Ok(parsed)
}

fn describe_spec(s: &LinearFodeSpec) -> String {
    let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    format!(
        "coefficients [{}] initial [{}] forcing {:?}",
        list(&s.coefficients),
        list(&s.initial),
        s.forcing
    )
}

pub fn fode(spec_name: &str, beta: Option<f64>, t_grid: GridSpec, repeats: usize, run: &RunArgs) -> Result<()> {
    let spec = resolve_spec(spec_name, beta)?;
    let rows = fode_sweep(&spec, &t_grid, run.n, repeats, run.seed, OdeTolerances::default())?;
    let mut table = Table::new([
        "t",
        "mc_mean",
        "mc_se",
        "n",
        "repeats",
        "lo_envelope",
        "hi_envelope",
        "exact",
    ]);
    for r in &rows {
        table.rows.push(vec![
            r.t,
            r.mean,
            r.std_error,
            r.n as f64,
            r.repeats as f64,
            r.lo_envelope,
            r.hi_envelope,
            spec.exact(r.t).unwrap_or(f64::NAN),
        ]);
    }
    let params = [
        ("spec", spec_name.to_string()),
        ("equation", describe_spec(&spec)),
        ("beta", spec.beta.to_string()),
        ("t_grid", format_grid(&t_grid)),
        ("repeats", repeats.to_string()),
    ];
    emit(table, "fode", &params, run)
}

#[allow(clippy::too_many_arguments)]
pub fn heat(
    alpha: f64,
    beta: f64,
    theta: f64,
    initial: &str,
    x_grid: GridSpec,
    t_grid: GridSpec,
    oracle: bool,
    run: &RunArgs,
) -> Result<()> {
    let order = FracOrder::new(beta, alpha, theta)?;
    let spec = HeatSpec::new(order, InitialLaw::parse(initial)?)?;
    let source = match (&spec.initial, oracle) {
        (InitialLaw::PointMass(x0), true) => Some(*x0),
        (_, true) => bail!("--oracle needs a point-mass initial law"),
        _ => None,
    };
    let surface = heat_surface(&spec, &x_grid, &t_grid, mc_run(run))?;
    let mut table = surface.to_table();
    if let Some(x0) = source {
        let cfg = QuadratureConfig::default();
        table.columns.push("oracle".into());
        for row in &mut table.rows {
            let v = match green_fourier(order, row[0] - x0, row[1], &cfg) {
                Ok(v) => v,
                Err(Error::Divergent(_)) => f64::INFINITY,
                Err(e) => return Err(e.into()),
            };
            row.push(v);
        }
    }
    let params = [
        ("alpha", alpha.to_string()),
        ("beta", beta.to_string()),
        ("theta", theta.to_string()),
        ("initial", spec.initial.tag()),
    ];
    emit(table, "heat", &params, run)
}

pub fn wave(k: f64, beta: f64, profile: Profile, x_grid: GridSpec, t_grid: GridSpec, run: &RunArgs) -> Result<()> {
    let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match profile {
        Profile::Gaussian => Arc::new(|x: f64| (-x * x).exp()),
        Profile::Cos => Arc::new(f64::cos),
        Profile::Linear => Arc::new(|x| x),
    };
    let spec = WaveSpec::new(k, beta, f)?;
    let surface = wave_surface(&spec, &x_grid, &t_grid, mc_run(run))?;
    let name = profile.to_possible_value().unwrap().get_name().to_string();
    let params = [("k", k.to_string()), ("beta", beta.to_string()), ("profile", name)];
    emit(surface.to_table(), "wave", &params, run)
}

fn mean_abs_error(a: &SolutionSurface, b: &SolutionSurface, it: usize) -> f64 {
    let nx = a.x_grid.count;
    (0..nx).map(|ix| (a.get(ix, it).mean - b.get(ix, it).mean).abs()).sum::<f64>() / nx as f64
}

pub fn fokker_planck(
    beta: f64,
    initial: &str,
    x_grid: GridSpec,
    t_grid: GridSpec,
    compare_n: Option<(usize, usize)>,
    run: &RunArgs,
) -> Result<()> {
    let spec = FokkerPlanckSpec::new(beta, InitialLaw::parse(initial)?)?;
    let mut params = vec![("beta", beta.to_string()), ("initial", spec.initial.tag())];
    let table = match compare_n {
        None => fokker_planck_surface(&spec, &x_grid, &t_grid, mc_run(run))?.to_table(),
        Some((na, nb)) => {
            let runs = [na, nb].map(|n| McRun::new(n, run.seed).with_shards(PARTITIONS));
            let a = fokker_planck_surface(&spec, &x_grid, &t_grid, runs[0])?;
            let b = fokker_planck_surface(&spec, &x_grid, &t_grid, runs[1])?;
            let mut table = Table::new(["t", "mean_abs_error"])
                .with_meta("x_grid", format_grid(&x_grid))
                .with_meta("t_grid", format_grid(&t_grid));
            for (it, t) in t_grid.points().into_iter().enumerate() {
                table.rows.push(vec![t, mean_abs_error(&a, &b, it)]);
            }
            params.push(("compare_n", format!("{na}:{nb}")));
            table
        }
    };
    emit(table, "fokker-planck", &params, run)
}

pub fn oracle(
    kind: OracleKind,
    alpha: f64,
    beta: f64,
    s: f64,
    x_grid: GridSpec,
    t_grid: GridSpec,
    run: &RunArgs,
) -> Result<()> {
    let z = |mc: f64, se: f64, exact: f64| (mc - exact).abs() / se;
    let (table, params) = match kind {
        OracleKind::Laplace => {
            let mut table = Table::new(["t", "s", "exact", "mc", "se", "abs_diff_over_se"])
                .with_meta("t_grid", format_grid(&t_grid));
            for t in t_grid.points() {
                let (mc, exact) = laplace_check(beta, s, t, run.n, run.seed, PARTITIONS)?;
                table
                    .rows
                    .push(vec![t, s, exact, mc.mean, mc.std_error, z(mc.mean, mc.std_error, exact)]);
            }
            (table, vec![("kind", "laplace".to_string()), ("beta", beta.to_string()), ("s", s.to_string())])
        }
        OracleKind::Green => {
            let order = FracOrder::symmetric(beta, alpha)?;
            let surface = heat_surface(&HeatSpec::green(beta, alpha)?, &x_grid, &t_grid, mc_run(run))?;
            let cfg = QuadratureConfig::default();
            let mut table = Table::new(["x", "t", "exact", "mc", "se", "abs_diff_over_se"])
                .with_meta("x_grid", format_grid(&x_grid))
                .with_meta("t_grid", format_grid(&t_grid));
            for (ix, x) in x_grid.points().into_iter().enumerate() {
                for (it, t) in t_grid.points().into_iter().enumerate() {
                    let e = surface.get(ix, it);
                    let exact = match green_fourier(order, x, t, &cfg) {
                        Ok(v) => v,
                        Err(Error::Divergent(_)) => f64::INFINITY,
                        Err(e) => return Err(e.into()),
                    };
                    table
                        .rows
                        .push(vec![x, t, exact, e.mean, e.std_error, z(e.mean, e.std_error, exact)]);
                }
            }
            (table, vec![("kind", "green".to_string()), ("alpha", alpha.to_string()), ("beta", beta.to_string())])
        }
    };
    emit(table, "oracle", &params, run)
}
