//! Argument parsing and output for the `spraykit` binary.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use spraykit::families::{Family, VolumeChoice};
use spraykit::suite::{self, Command, RunConfig, RunOutput, Table};

/// Exit code when every check passes.
pub const EXIT_PASS: i32 = 0;
/// Exit code when the run completed but some check failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for invalid configuration or I/O errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spraykit", version, about = "Spray curvature and projective flatness verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Dump curvature packs at sampled points.
    Curvature(RunArgs),
    /// Run the curvature identity battery.
    Verify(RunArgs),
    /// Build the hat spray and check the Pontryagin forms.
    Pontryagin(RunArgs),
    /// Solve the Bryant ODE and check the P-relation.
    Bryant(RunArgs),
    /// Jet, finite-difference and Chern-Weil kernel batteries.
    Selftest(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Spray family.
    #[arg(long, value_parser = parse_family)]
    pub spray: Option<Family>,
    /// Chart dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Bryant angle in (0, pi/2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Pontryagin degree index (forms of degree 4k).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample points (finite-difference cases for selftest).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Override every residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Right end of the ODE interval in u = 1/|x|.
    #[arg(long)]
    pub umax: Option<f64>,
    /// ODE step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Volume form: euclidean, sphere or exponential.
    #[arg(long, value_parser = parse_volume)]
    pub volume: Option<VolumeChoice>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV table path for curvature, pontryagin and bryant.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Worker threads (rayon default when absent).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write wall_ms = 0 so reports are byte-comparable.
    #[arg(long)]
    pub no_timing: bool,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: spraykit::Error| e.to_string())
}

fn parse_volume(s: &str) -> Result<VolumeChoice, String> {
    s.parse().map_err(|e: spraykit::Error| e.to_string())
}

impl Cmd {
    pub fn parts(&self) -> (Command, &RunArgs) {
        match self {
            Cmd::Curvature(a) => (Command::Curvature, a),
            Cmd::Verify(a) => (Command::Verify, a),
            Cmd::Pontryagin(a) => (Command::Pontryagin, a),
            Cmd::Bryant(a) => (Command::Bryant, a),
            Cmd::Selftest(a) => (Command::Selftest, a),
        }
    }
}

impl RunArgs {
    /// Command defaults overridden by the given flags.
    pub fn config(&self, command: Command) -> RunConfig {
        let d = RunConfig::new(command);
        RunConfig {
            command,
            spray: self.spray.unwrap_or(d.spray),
            dim: self.dim.unwrap_or(d.dim),
            alpha: self.alpha.unwrap_or(d.alpha),
            k: self.k.unwrap_or(d.k),
            seed: self.seed.unwrap_or(d.seed),
            samples: self.samples.unwrap_or(d.samples),
            tol: self.tol.or(d.tol),
            umax: self.umax.unwrap_or(d.umax),
            step: self.step.unwrap_or(d.step),
            volume: self.volume.unwrap_or(d.volume),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(spraykit::Error),
    Io(PathBuf, io::Error),
    Csv(PathBuf, csv::Error),
    Threads(rayon::ThreadPoolBuildError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "invalid configuration: {e}"),
            CliError::Io(p, e) => write!(f, "cannot write {}: {e}", p.display()),
            CliError::Csv(p, e) => write!(f, "cannot write {}: {e}", p.display()),
            CliError::Threads(e) => write!(f, "cannot start thread pool: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Run with a dedicated pool when a thread count is given.
pub fn run_with_threads(config: &RunConfig, threads: Option<usize>) -> Result<RunOutput, CliError> {
    let run = || suite::run(config).map_err(CliError::Config);
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(CliError::Threads)?
            .install(run),
        None => run(),
    }
}

pub fn write_table(path: &PathBuf, table: &Table) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Csv(path.clone(), e))?;
    w.write_record(&table.header).map_err(|e| CliError::Csv(path.clone(), e))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| CliError::Csv(path.clone(), e))?;
    }
    w.flush().map_err(|e| CliError::Io(path.clone(), e))
}

/// Execute a parsed command line and return the process exit code.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let (command, args) = cli.command.parts();
    let config = args.config(command);
    let start = Instant::now();
    let mut output = run_with_threads(&config, args.threads)?;
    output.report.wall_ms = if args.no_timing {
        0
    } else {
        start.elapsed().as_millis() as u64
    };
    let json = output.report.to_json();
    match &args.out {
        Some(path) => {
            File::create(path)
                .and_then(|mut f| f.write_all(json.as_bytes()))
                .map_err(|e| CliError::Io(path.clone(), e))?;
        }
        None => io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))?,
    }
    if let (Some(path), Some(table)) = (&args.csv, &output.table) {
        write_table(path, table)?;
    }
    for c in output.report.failures() {
        eprintln!(
            "FAIL {} [{}]: residual {:e} > tolerance {:e}{}",
            c.name,
            c.anchor,
            c.max_residual,
            c.tolerance,
            c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    Ok(if output.report.all_pass() { EXIT_PASS } else { EXIT_FAIL })
}
