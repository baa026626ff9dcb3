mod commands;

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fracmc::mc::GridSpec;

/// Monte Carlo solutions of time-fractional differential equations.
///
/// Every command writes a CSV table (to `--out` or stdout) whose `#`
/// header lines record the full run configuration.
#[derive(Debug, Parser)]
#[command(name = "fracmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Draws per estimate; accepts forms like 1e6.
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub n: usize,
    /// Worker threads. Results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TimeArgs {
    /// Single time.
    #[arg(long, conflicts_with = "t_grid")]
    pub t: Option<f64>,
    /// Time grid start:stop:count.
    #[arg(long)]
    pub t_grid: Option<GridSpec>,
}

impl TimeArgs {
    pub fn grid(&self, default: &str) -> anyhow::Result<GridSpec> {
        Ok(match (self.t, self.t_grid) {
            (Some(t), _) => GridSpec::point(t)?,
            (None, Some(g)) => g,
            (None, None) => default.parse()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawName {
    StableOneside,
    Subordinator,
    InverseSubordinator,
    GaussianKernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// e^{-x²}
    Gaussian,
    Cos,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    /// E[e^{-s T_β(t)}] against E_β(-s t^β) over the time grid.
    Laplace,
    /// Heat Green function against Fourier inversion over the (x, t) grid.
    Green,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw from a one-sided stable law, a subordinator, an inverse
    /// subordinator or the Gaussian kernel.
    Sample {
        #[arg(long, value_enum)]
        law: LawName,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Linear Caputo equation solved by averaging the classical solution.
    Fode {
        /// Built-in name (decay, growth, oscillator, constant) or a
        /// `key = value` spec file.
        #[arg(long, default_value = "decay")]
        spec: String,
        #[arg(long)]
        beta: Option<f64>,
        #[command(flatten)]
        time: TimeArgs,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Space–time fractional diffusion surface.
    Heat {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        /// point:X0, gaussian:MEAN:SD or table:PATH
        #[arg(long, default_value = "point:0", allow_hyphen_values = true)]
        initial: String,
        #[arg(long, default_value = "-5:5:11", allow_hyphen_values = true)]
        x_grid: GridSpec,
        #[command(flatten)]
        time: TimeArgs,
        /// Add the Fourier-inversion value as an `oracle` column.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fractional wave equation surface.
    Wave {
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, value_enum, default_value = "gaussian")]
        profile: Profile,
        #[arg(long, default_value = "-5:5:11", allow_hyphen_values = true)]
        x_grid: GridSpec,
        #[command(flatten)]
        time: TimeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fractional Ornstein–Uhlenbeck Fokker–Planck surface.
    FokkerPlanck {
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value = "point:0", allow_hyphen_values = true)]
        initial: String,
        #[arg(long, default_value = "-5:5:11", allow_hyphen_values = true)]
        x_grid: GridSpec,
        #[command(flatten)]
        time: TimeArgs,
        /// Mean absolute difference over x between runs with A and B draws.
        #[arg(long, value_parser = parse_compare)]
        compare_n: Option<(usize, usize)>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Monte Carlo estimates next to exact references.
    Oracle {
        #[arg(long, value_enum, default_value = "laplace")]
        kind: OracleKind,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value = "0:2:3", allow_hyphen_values = true)]
        x_grid: GridSpec,
        #[command(flatten)]
        time: TimeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v < 9_007_199_254_740_992.0) {
        return Err(format!("expected a positive whole count, got {s:?}"));
    }
    Ok(v as usize)
}

fn parse_compare(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s:?}"))?;
    Ok((parse_count(a)?, parse_count(b)?))
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let shards = match &cli.command {
        Command::Sample { run, .. }
        | Command::Fode { run, .. }
        | Command::Heat { run, .. }
        | Command::Wave { run, .. }
        | Command::FokkerPlanck { run, .. }
        | Command::Oracle { run, .. } => run.shards,
    };
    if shards == 0 {
        bail!("--shards must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(shards)
        .build_global()
        .context("starting worker threads")?;

    match cli.command {
        Command::Sample { law, alpha, beta, t, run } => commands::sample(law, alpha, beta, t, &run),
        Command::Fode { spec, beta, time, repeats, run } => {
            commands::fode(&spec, beta, time.grid("1:10:10")?, repeats, &run)
        }
        Command::Heat { alpha, beta, theta, initial, x_grid, time, oracle, run } => commands::heat(
            alpha,
            beta,
            theta,
            &initial,
            x_grid,
            time.grid("1:10:10")?,
            oracle,
            &run,
        ),
        Command::Wave { k, beta, profile, x_grid, time, run } => {
            commands::wave(k, beta, profile, x_grid, time.grid("1:10:10")?, &run)
        }
        Command::FokkerPlanck { beta, initial, x_grid, time, compare_n, run } => {
            commands::fokker_planck(beta, &initial, x_grid, time.grid("1:10:10")?, compare_n, &run)
        }
        Command::Oracle { kind, alpha, beta, s, x_grid, time, run } => {
            commands::oracle(kind, alpha, beta, s, x_grid, time.grid("1:4:2")?, &run)
        }
    }
}
