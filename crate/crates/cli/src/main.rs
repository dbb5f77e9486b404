//! `circlock`: rotation numbers, locking windows and skew-product experiments
//! from the command line.

mod commands;
mod config;
mod defs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigFile, Resolver};
use crate::output::Outputs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] circlock_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        use circlock_core::Error as E;
        match self {
            CliError::Input(_) => 2,
            CliError::Core(E::InvalidInput(_)) => 2,
            CliError::Core(E::HypothesisViolation(_)) => 4,
            CliError::Core(E::Csv(_)) => 1,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "circlock",
    version,
    about = "Rotation numbers, locking windows and skew-product experiments",
    after_help = "Exit codes: 0 success, 1 output error, 2 bad input, 3 degenerate map, 4 hypothesis violation.\n\
                  Settings resolve as flag > CIRCLOCK_* env var > --config file > default."
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Definition file (family for rho/windows/tongues, skew map for skew/theoremA).
    #[arg(long, global = true, env = "CIRCLOCK_INPUT")]
    input: Option<PathBuf>,
    /// Output directory, created if missing [default: circlock-out].
    #[arg(long, global = true, env = "CIRCLOCK_OUT")]
    out: Option<PathBuf>,
    /// Largest denominator tested for locking.
    #[arg(long, global = true, env = "CIRCLOCK_QMAX")]
    qmax: Option<u64>,
    /// Random seed, recorded in every report.
    #[arg(long, global = true, env = "CIRCLOCK_SEED",
          value_parser = clap::value_parser!(u64).range(0..=i64::MAX as u64))]
    seed: Option<u64>,
    /// Worker threads; 1 gives a serial reference run [default: available cores].
    #[arg(long, global = true, env = "CIRCLOCK_WORKERS",
          value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Bisection tolerance for window boundaries.
    #[arg(long, global = true, env = "CIRCLOCK_TOL")]
    tol: Option<f64>,
    /// Grid size: lock-test grid (rho), midpoint grid (dio), fiber grid for the C³ check (skew).
    #[arg(long, global = true, env = "CIRCLOCK_GRID")]
    grid: Option<usize>,
    /// Label override for the loaded family or map.
    #[arg(long, global = true, env = "CIRCLOCK_LABEL")]
    label: Option<String>,
    /// TOML file with defaults for any of the above and per-subcommand tables.
    #[arg(long, global = true, env = "CIRCLOCK_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Rotation number and classification at each parameter value.
    Rho(RhoArgs),
    /// Locking windows of one family and the measure of locked parameters.
    Windows(WindowsArgs),
    /// Windows across an amplitude grid (tongue diagram).
    Tongues(TonguesArgs),
    /// Measure of the Diophantine set.
    Dio(DioArgs),
    /// Periodic circles, their C³ checks, and the quasiperiodic search.
    Skew(SkewArgs),
    /// Intersection of locked sets over restricted families, with η̂.
    #[command(name = "theoremA")]
    TheoremA(TheoremAArgs),
}

#[derive(Args, Debug)]
pub struct RhoArgs {
    /// Comma-separated parameter values.
    #[arg(long, env = "CIRCLOCK_T", value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Evenly spaced parameters `a:b:n`, endpoints included.
    #[arg(long, env = "CIRCLOCK_T_RANGE", conflicts_with = "t")]
    pub t_range: Option<String>,
    /// Orbit length for the estimate [default: 10000].
    #[arg(long, env = "CIRCLOCK_N_ITER")]
    pub n_iter: Option<u64>,
}

#[derive(Args, Debug)]
pub struct WindowsArgs {
    /// Monte Carlo samples for the locked measure [default: 2000].
    #[arg(long, env = "CIRCLOCK_SAMPLES")]
    pub samples: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TonguesArgs {
    /// Amplitudes applied to the input family's g (Arnold sine profile without --input)
    /// [default: 0,0.05,0.1,0.15].
    #[arg(long, env = "CIRCLOCK_DELTAS", value_delimiter = ',', allow_negative_numbers = true)]
    pub deltas: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct DioArgs {
    /// Comma-separated constants C in (0, 2] [default: 0.1].
    #[arg(long, env = "CIRCLOCK_C", value_delimiter = ',')]
    pub c: Vec<f64>,
    /// Largest n in the condition [default: 1000].
    #[arg(long, env = "CIRCLOCK_NMAX")]
    pub nmax: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SkewArgs {
    /// Comma-separated parameter values for the search.
    #[arg(long, env = "CIRCLOCK_T", value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Uniform random parameters when --t is absent [default: 200].
    #[arg(long, env = "CIRCLOCK_SAMPLES")]
    pub samples: Option<usize>,
    /// Largest circle period [default: 4].
    #[arg(long, env = "CIRCLOCK_NMAX")]
    pub nmax: Option<u32>,
    /// C³ radius; circles failing it are skipped by the search (no filter when absent).
    #[arg(long, env = "CIRCLOCK_RADIUS")]
    pub radius: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TheoremAArgs {
    /// Number of restricted families, one per period 1..=nmax [default: 6].
    #[arg(long, env = "CIRCLOCK_NMAX")]
    pub nmax: Option<u32>,
    /// Common random parameter samples [default: 10000].
    #[arg(long, env = "CIRCLOCK_SAMPLES")]
    pub samples: Option<usize>,
    /// Random families per radius for η̂; 0 skips it [default: 8].
    #[arg(long, env = "CIRCLOCK_ETA_FAMILIES")]
    pub eta_families: Option<usize>,
    /// Samples per random family for η̂ [default: 2000].
    #[arg(long, env = "CIRCLOCK_ETA_SAMPLES")]
    pub eta_samples: Option<usize>,
    /// Record violated norm hypotheses instead of exiting with status 4.
    #[arg(long, env = "CIRCLOCK_ALLOW_NONCONFORMING")]
    pub allow_nonconforming: bool,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Rho(_) => "rho",
            Cmd::Windows(_) => "windows",
            Cmd::Tongues(_) => "tongues",
            Cmd::Dio(_) => "dio",
            Cmd::Skew(_) => "skew",
            Cmd::TheoremA(_) => "theoremA",
        }
    }

    fn default_qmax(&self) -> u64 {
        match self {
            Cmd::Windows(_) => 16,
            Cmd::Tongues(_) => 12,
            _ => 30,
        }
    }
}

/// Settings shared by every subcommand, after resolution.
pub struct Run<'a> {
    pub input: Option<PathBuf>,
    pub qmax: u64,
    pub seed: u64,
    pub label: Option<String>,
    tol: Option<f64>,
    grid: Option<usize>,
    pub r: Resolver<'a>,
}

impl Run<'_> {
    pub fn tol(&mut self, default: f64) -> f64 {
        let file = self.r.cfg.tol;
        self.r.common("tol", self.tol, file, default)
    }

    pub fn grid(&mut self, default: usize) -> usize {
        let file = self.r.cfg.grid;
        self.r.common("grid", self.grid, file, default)
    }

    pub fn require_input(&self) -> Result<&PathBuf, CliError> {
        self.input
            .as_ref()
            .ok_or_else(|| CliError::Input(format!("{} needs --input", self.r.sub)))
    }
}

fn resolve_input(p: PathBuf) -> Result<PathBuf, CliError> {
    std::fs::canonicalize(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let c = cli.common;
    let cfg = match &c.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let sub = cli.cmd.name();
    let mut r = Resolver::new(sub, &cfg);

    let input = c.input.or(cfg.input.clone()).map(resolve_input).transpose()?;
    if let Some(p) = &input {
        r.common("input", Some(p.display().to_string()), None, String::new());
    }
    let out = c.out.or(cfg.out.clone()).unwrap_or_else(|| "circlock-out".into());
    let out = std::path::absolute(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    r.common("out", Some(out.display().to_string()), None, String::new());
    let qmax = r.common("qmax", c.qmax, cfg.qmax, cli.cmd.default_qmax());
    let seed = r.common("seed", c.seed, cfg.seed, circlock_core::rng::DEFAULT_SEED);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let workers = r.common("workers", c.workers, cfg.workers.map(|w| w as u64), cores);
    let label = c.label.or(cfg.label.clone());
    if let Some(l) = &label {
        r.common("label", Some(l.clone()), None, String::new());
    }

    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1) as usize)
        .build_global()
        .map_err(|e| CliError::Io(format!("worker pool: {e}")))?;

    let mut run = Run {
        input,
        qmax,
        seed,
        label,
        tol: c.tol,
        grid: c.grid,
        r,
    };
    let mut outputs = Outputs::default();
    let mut report = match cli.cmd {
        Cmd::Rho(a) => commands::rho(&mut run, a, &mut outputs)?,
        Cmd::Windows(a) => commands::windows(&mut run, a, &mut outputs)?,
        Cmd::Tongues(a) => commands::tongues(&mut run, a, &mut outputs)?,
        Cmd::Dio(a) => commands::dio(&mut run, a, &mut outputs)?,
        Cmd::Skew(a) => commands::skew(&mut run, a, &mut outputs)?,
        Cmd::TheoremA(a) => commands::theorem_a(&mut run, a, &mut outputs)?,
    };
    report.wall_clock_s = start.elapsed().as_secs_f64();
    let json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    outputs.add("report.json", json);
    outputs.add("effective_config.toml", run.r.dump().into_bytes());
    outputs.commit(&out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("circlock: {e}");
            ExitCode::from(e.code())
        }
    }
}
