//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are run at full strength and
//! reported as failures; they only stop the suite from exiting non-zero.

use std::path::Path;
use std::process::{self, Command};
use std::time::{Duration, Instant};

use fracmc::fode::{solve_fode, LinearFodeSpec};
use fracmc::green::{fokker_planck_surface, heat_solution, heat_surface, FokkerPlanckSpec, HeatSpec, InitialLaw};
use fracmc::mc::{expect, expect_vec_sharded_at, Estimate, GridSpec, McRun};
use fracmc::oracle::green_fourier;
use fracmc::quad::QuadratureConfig;
use fracmc::sampler::{Law, RngStream};
use fracmc::special::{frac_sin, gamma, heat_kernel, ml, FracOrder};
use fracmc::Error;
use statrs::function::erf::erfc;

type Check = anyhow::Result<(bool, String)>;
type Criterion = (&'static str, &'static str, fn() -> Check);
type HeatPoint = (f64, f64, Estimate, Result<f64, Error>);

const KNOWN_FAILURES: &[&str] = &["4b"];

/// Mittag-Leffler decay benchmark, single worker.
fn criterion_1() -> Check {
    let start = Instant::now();
    let mut fractions = Vec::new();
    for (n, seed) in [(10_000, 1001), (1_000_000, 1002)] {
        let mut hits = 0;
        for i in 1..=10 {
            let t = i as f64;
            let law = Law::inverse_subordinator(0.5, t)?;
            let e = expect(&mut RngStream::new(seed, i as u64), &law, |x| (-x).exp(), n)?;
            if e.within(ml(0.5, 1.0, -t.sqrt())?, 4.0) {
                hits += 1;
            }
        }
        fractions.push(hits as f64 / 10.0);
    }
    let elapsed = start.elapsed();
    let ok = fractions[0] >= 0.95 && fractions[1] == 1.0 && elapsed < Duration::from_secs(30);
    Ok((
        ok,
        format!(
            "n=1e4: {:.0}% of points within 4 SE, n=1e6: {:.0}%, {:.1} s",
            100.0 * fractions[0],
            100.0 * fractions[1],
            elapsed.as_secs_f64()
        ),
    ))
}

/// Moments k = 1, 2, 3 of T_β(t).
fn criterion_2() -> Check {
    let mut worst: f64 = 0.0;
    let mut seed = 2000;
    for beta in [0.2, 0.5, 0.8] {
        for t in [0.5, 1.0, 5.0] {
            seed += 1;
            let law = Law::inverse_subordinator(beta, t)?;
            let est = expect_vec_sharded_at(
                seed,
                0,
                &law,
                |x, out: &mut [f64]| {
                    out[0] = x;
                    out[1] = x * x;
                    out[2] = x * x * x;
                },
                3,
                1_000_000,
                8,
            )?;
            for (k, e) in (1..=3).zip(&est) {
                let kf = k as f64;
                let exact = gamma(kf + 1.0) * t.powf(kf * beta) / gamma(kf * beta + 1.0);
                worst = worst.max(e.z_score(exact));
            }
        }
    }
    Ok((worst <= 4.0, format!("27 moments, largest deviation {worst:.2} SE")))
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Kanter sampler at α = 0.5: Kolmogorov–Smirnov and Laplace functional.
fn criterion_3() -> Check {
    let n = 100_000;
    let law = Law::stable(0.5)?;
    let draws = law.sample(&mut RngStream::new(3001, 0), n).values;
    let d = ks_statistic(draws, |x| erfc(0.5 / x.sqrt()));
    let critical = 1.6276 / (n as f64).sqrt();
    let mut worst: f64 = 0.0;
    for (i, s) in [0.5f64, 1.0, 2.0].into_iter().enumerate() {
        let e = expect(&mut RngStream::new(3002, i as u64), &law, |x| (-s * x).exp(), n)?;
        worst = worst.max(e.z_score((-s.sqrt()).exp()));
    }
    Ok((
        d < critical && worst <= 4.0,
        format!("KS D = {d:.5} (1% critical {critical:.5}), Laplace worst {worst:.2} SE"),
    ))
}

fn heat_points(xs: &[f64], seed: u64) -> anyhow::Result<Vec<HeatPoint>> {
    let spec = HeatSpec::green(0.5, 1.0)?;
    let order = FracOrder::symmetric(0.5, 1.0)?;
    let cfg = QuadratureConfig::default();
    let mut out = Vec::new();
    for &x in xs {
        for t in [1.0, 4.0] {
            let e = heat_solution(&spec, x, t, McRun::new(1_000_000, seed).with_shards(8))?;
            out.push((x, t, e, green_fourier(order, x, t, &cfg)));
        }
    }
    Ok(out)
}

/// Heat equation against Fourier inversion, x ≠ 0, plus the Gaussian route.
fn criterion_4a() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (_, _, e, exact) in heat_points(&[1.0, 2.0], 4001)? {
        worst = worst.max(e.z_score(exact?));
    }
    let spec = HeatSpec::green(1.0, 2.0)?;
    let xg = GridSpec::new(-5.0, 5.0, 11)?;
    let tg = GridSpec::new(1.0, 10.0, 10)?;
    let s = heat_surface(&spec, &xg, &tg, McRun::new(1_000_000, 4002))?;
    let mut gauss_err: f64 = 0.0;
    for (ix, x) in xg.points().into_iter().enumerate() {
        for (it, t) in tg.points().into_iter().enumerate() {
            gauss_err = gauss_err.max((s.get(ix, it).mean - heat_kernel(x, t)?).abs());
        }
    }
    let elapsed = start.elapsed();
    Ok((
        worst <= 4.0 && gauss_err <= 1e-12 && elapsed < Duration::from_secs(120),
        format!(
            "x in {{1, 2}}: worst {worst:.2} SE; Gaussian route max error {gauss_err:.1e}; {:.1} s",
            elapsed.as_secs_f64()
        ),
    ))
}

/// Heat equation against Fourier inversion at x = 0.
fn criterion_4b() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for (_, t, e, exact) in heat_points(&[0.0], 4003)? {
        match exact {
            Ok(v) => {
                ok &= e.within(v, 4.0);
                notes.push(format!("t={t}: {:.2} SE", e.z_score(v)));
            }
            Err(err) => {
                ok = false;
                notes.push(format!("t={t}: MC {:.4} ± {:.4}, oracle: {err}", e.mean, e.std_error));
            }
        }
    }
    Ok((ok, notes.join("; ")))
}

/// Fractional sine through the ODE bridge.
fn criterion_5() -> Check {
    let spec = LinearFodeSpec::oscillator(0.5)?;
    let grid = GridSpec::new(0.0, 10.0, 21)?;
    let mut worst: f64 = 0.0;
    for (t, e) in solve_fode(&spec, &grid, 1_000_000, 5001)? {
        worst = worst.max(e.z_score(frac_sin(0.5, t)?));
    }
    Ok((worst <= 4.0, format!("21 points on [0, 10], worst {worst:.2} SE")))
}

/// Fokker–Planck near-classical limit and mass.
fn criterion_6() -> Check {
    const SLACK: f64 = 0.01;
    let x0 = 0.5;
    let xg = GridSpec::new(-4.0, 4.0, 17)?;
    let tg = GridSpec::new(1.0, 10.0, 10)?;
    let spec = FokkerPlanckSpec::new(0.99, InitialLaw::PointMass(x0))?;
    let s = fokker_planck_surface(&spec, &xg, &tg, McRun::new(1_000_000, 6001).with_shards(8))?;
    let mut limit_ok = true;
    let mut worst_gap: f64 = 0.0;
    for (ix, x) in xg.points().into_iter().enumerate() {
        for (it, t) in tg.points().into_iter().enumerate() {
            let (m, v) = (x0 * (-t).exp(), -(-2.0 * t).exp_m1());
            let exact = (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
            let e = s.get(ix, it);
            let gap = (e.mean - exact).abs();
            limit_ok &= gap <= 4.0 * e.std_error + SLACK;
            worst_gap = worst_gap.max(gap);
        }
    }
    let mut worst_mass: f64 = 0.0;
    let wide = GridSpec::new(-8.0, 8.0, 161)?;
    for beta in [0.1, 0.5, 0.9] {
        let spec = FokkerPlanckSpec::new(beta, InitialLaw::PointMass(0.0))?;
        let s = fokker_planck_surface(&spec, &wide, &tg, McRun::new(100_000, 6002).with_shards(8))?;
        for it in 0..tg.count {
            worst_mass = worst_mass.max((s.mass(it) - 1.0).abs());
        }
    }
    Ok((
        limit_ok && worst_mass <= 0.02,
        format!("beta=0.99 largest gap {worst_gap:.4}; mass error at most {:.2}%", 100.0 * worst_mass),
    ))
}

/// Composition: T_β(T_α(t)) against T_{βα}(t).
fn criterion_7() -> Check {
    let (beta, alpha, t) = (0.5, 0.8, 1.0);
    let nested = Law::nested_inverse(beta, alpha, t)?;
    let direct = Law::inverse_subordinator(beta * alpha, t)?;
    let moments = |law: &Law, seed| {
        expect_vec_sharded_at(
            seed,
            0,
            law,
            |x, out: &mut [f64]| {
                out[0] = x;
                out[1] = x * x;
            },
            2,
            1_000_000,
            8,
        )
    };
    let (a, b) = (moments(&nested, 7001)?, moments(&direct, 7002)?);
    let mut worst_exact: f64 = 0.0;
    let mut worst_pair: f64 = 0.0;
    for k in 0..2 {
        let kf = (k + 1) as f64;
        let exact = gamma(kf + 1.0) * t.powf(kf * beta * alpha) / gamma(kf * beta * alpha + 1.0);
        worst_exact = worst_exact.max(a[k].z_score(exact));
        let se = a[k].std_error.hypot(b[k].std_error);
        worst_pair = worst_pair.max((a[k].mean - b[k].mean).abs() / se);
    }
    Ok((
        worst_exact <= 4.0 && worst_pair <= 4.0,
        format!("nested vs formula {worst_exact:.2} SE, nested vs direct {worst_pair:.2} SE"),
    ))
}

fn run_cli(args: &[&str], out: &Path) -> anyhow::Result<Vec<u8>> {
    let status = Command::new(env!("CARGO_BIN_EXE_fracmc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()?;
    anyhow::ensure!(status.success(), "fracmc {} exited with {status}", args.join(" "));
    Ok(std::fs::read(out)?)
}

/// Byte-identical CLI output on re-runs, for 1 and 8 shards.
fn criterion_8() -> Check {
    let commands: &[&[&str]] = &[
        &["sample", "--law", "stable-oneside", "--alpha", "0.5"],
        &["sample", "--law", "subordinator", "--alpha", "0.7", "--t", "2"],
        &["sample", "--law", "inverse-subordinator", "--beta", "0.5", "--t", "1"],
        &["sample", "--law", "gaussian-kernel", "--t", "1"],
        &["fode", "--spec", "decay", "--beta", "0.5", "--repeats", "3"],
        &["fode", "--spec", "oscillator", "--beta", "0.5", "--t-grid", "0:10:11"],
        &["heat", "--alpha", "0.6", "--beta", "0.5", "--oracle"],
        &["wave", "--k", "1", "--beta", "0.5"],
        &["fokker-planck", "--beta", "0.5"],
        &["fokker-planck", "--beta", "0.9", "--compare-n", "1e3:1e4"],
        &["oracle", "--kind", "laplace"],
        &["oracle", "--kind", "green"],
    ];
    let dir = tempfile::tempdir()?;
    let mut runs = 0;
    for (i, cmd) in commands.iter().enumerate() {
        for shards in ["1", "8"] {
            let mut args = cmd.to_vec();
            args.extend(["--n", "1e4", "--seed", "17", "--shards", shards]);
            let a = run_cli(&args, &dir.path().join(format!("{i}-{shards}-a.csv")))?;
            let b = run_cli(&args, &dir.path().join(format!("{i}-{shards}-b.csv")))?;
            if a != b {
                return Ok((false, format!("fracmc {} differs between runs", args.join(" "))));
            }
            runs += 2;
        }
    }
    Ok((true, format!("{runs} runs over {} command lines", commands.len())))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1", "Mittag-Leffler decay benchmark", criterion_1),
        ("2", "inverse subordinator moments", criterion_2),
        ("3", "stable sampler KS and Laplace", criterion_3),
        ("4a", "heat vs Fourier oracle, x != 0, and Gaussian route", criterion_4a),
        ("4b", "heat vs Fourier oracle, x = 0", criterion_4b),
        ("5", "fractional sine bridge", criterion_5),
        ("6", "Fokker-Planck limit and mass", criterion_6),
        ("7", "composition of inverse subordinators", criterion_7),
        ("8", "CLI determinism", criterion_8),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_FAILURES.contains(&id);
        let verdict = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!(
            "criterion {id:<3} {verdict:<12} {name}: {detail} [{:.1} s]",
            start.elapsed().as_secs_f64()
        );
    }
    if unexpected > 0 {
        println!("{unexpected} acceptance criteria failed");
        process::exit(1);
    }
}
