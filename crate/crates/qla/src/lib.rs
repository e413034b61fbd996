//! Command-line front end for `qla-core`: model files, capacity sweeps,
//! precision selection and CSV/table output.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod output;
pub mod precision;

pub use config::{DistSpec, Model, ModelConfig, QueueKind};
pub use output::Table;
pub use precision::Precision;

/// Environment variable that overrides `--precision`.
pub const PRECISION_ENV: &str = "QLA_PRECISION";

#[derive(Debug)]
pub enum CliError {
    /// Bad model file, bad flags or invalid parameters. Exit code 2.
    Config(String),
    /// The numerics failed. Exit code 3.
    Numeric { name: &'static str, message: String },
    /// Writing the output failed. Exit code 1.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric { name, message } => write!(f, "{name}: {message}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qla_core::Error> for CliError {
    fn from(e: qla_core::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric { name: e.name(), message: e.to_string() }
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "qla", version, about = "Loss probabilities of finite-buffer queues with server vacations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact loss probability from the embedded chain.
    Exact(ExactArgs),
    /// Asymptotic regime and the induced approximation.
    Asymptotic(AsymptoticArgs),
    /// Discrete-event simulation with batch-means confidence intervals.
    Simulate(SimulateArgs),
    /// Exact, asymptotic and (optionally) simulated values side by side.
    Compare(CompareArgs),
    /// Arrival-count sequences a_j, nu_j, b_j as CSV.
    KernelDump(KernelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Table,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = Emit::Csv)]
    pub emit: Emit,
    /// Write data here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Capacities {
    /// Single capacity N.
    #[arg(long)]
    pub capacity: Option<usize>,
    /// Inclusive sweep N1:N2:step.
    #[arg(long)]
    pub sweep: Option<String>,
}

impl Capacities {
    pub fn values(&self) -> Result<Vec<usize>, CliError> {
        match (&self.capacity, &self.sweep) {
            (Some(n), _) => Ok(vec![*n]),
            (None, Some(s)) => parse_sweep(s),
            (None, None) => Err(CliError::Config("need --capacity or --sweep".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub capacities: Capacities,
    /// Significant decimal digits of the working arithmetic.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Also report the total-variation distance to the infinite-buffer
    /// distribution, with this many extra terms of the infinite measure.
    #[arg(long, value_name = "N_TAIL")]
    pub tv: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AsymptoticArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub capacities: Capacities,
    #[arg(long)]
    pub precision: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Measured arrivals per replication.
    #[arg(long, default_value_t = 1_000_000)]
    pub arrivals: u64,
    #[arg(long, default_value_t = 100_000)]
    pub warmup: u64,
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent replications with seeds seed, seed+1, ...; run in
    /// parallel and pooled.
    #[arg(long, default_value_t = 1)]
    pub replications: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub capacity: usize,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub capacities: Capacities,
    #[arg(long)]
    pub precision: Option<u32>,
    /// Add simulated estimates to every row.
    #[arg(long)]
    pub simulate: bool,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest index j.
    #[arg(long)]
    pub n_max: usize,
    #[arg(long)]
    pub precision: Option<u32>,
}

/// Parses `N1:N2:step` into the inclusive list of capacities.
pub fn parse_sweep(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Config(format!("sweep must look like N1:N2:step, got {s:?}"));
    let parts: Vec<usize> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if step == 0 || lo > hi || lo == 0 {
        return Err(bad());
    }
    Ok((lo..=hi).step_by(step).collect())
}

/// Working precision: `QLA_PRECISION`, then `--precision`, then the default
/// (double up to N = 30, 57 digits beyond).
pub fn resolve_precision(flag: Option<u32>, max_n: usize) -> Result<Precision, CliError> {
    let env = match std::env::var(PRECISION_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Config(format!("{PRECISION_ENV} must be a digit count, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    match env.or(flag) {
        Some(d) => Precision::from_digits(d),
        None => Ok(Precision::default_for(max_n)),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let (common, table) = match &cli.command {
        Command::Exact(a) => {
            let model = ModelConfig::load(&a.common.model)?.build()?;
            let ns = a.capacities.values()?;
            // The recursion behind --tv runs to N + tail.
            let reach = ns.iter().copied().max().unwrap_or(0) + a.tv.unwrap_or(0);
            let p = resolve_precision(a.precision, reach)?;
            (&a.common, commands::exact(&model, &ns, a.tv, p)?)
        }
        Command::Asymptotic(a) => {
            let model = ModelConfig::load(&a.common.model)?.build()?;
            let ns = a.capacities.values()?;
            let p = resolve_precision(a.precision, ns.iter().copied().max().unwrap_or(0))?;
            (&a.common, commands::asymptotic(&model, &ns, p)?)
        }
        Command::Simulate(a) => {
            let model = ModelConfig::load(&a.common.model)?.build()?;
            (&a.common, commands::simulate(&model, a.capacity, &a.sim)?)
        }
        Command::Compare(a) => {
            let model = ModelConfig::load(&a.common.model)?.build()?;
            let ns = a.capacities.values()?;
            let p = resolve_precision(a.precision, ns.iter().copied().max().unwrap_or(0))?;
            let sim = a.simulate.then_some(&a.sim);
            (&a.common, commands::compare(&model, &ns, p, sim)?)
        }
        Command::KernelDump(a) => {
            let model = ModelConfig::load(&a.common.model)?.build()?;
            let p = resolve_precision(a.precision, a.n_max)?;
            (&a.common, commands::kernel_dump(&model, a.n_max, p)?)
        }
    };
    let text = match common.emit {
        Emit::Csv => table.to_csv(),
        Emit::Table => table.to_aligned(),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
