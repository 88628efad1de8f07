//! `obsent` command-line front end.
//!
//! Exit codes: 0 on success, 2 when an input fails validation (including
//! usage errors), 1 on any other failure.

mod commands;
mod demo;
mod error;
mod files;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use obsent_core::Tolerances;

pub use demo::{run_demo, DEMO_FILES};
pub use error::{CliError, CliResult};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "OBSENT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "obsent", version, about = "Observational entropy experiments")]
#[command(after_help = "Tolerance overrides: --tol-<name> <value>, e.g. --tol-hermitian 1e-8.\n\
Names: hermitian, trace, positivity, projector, rank, order, commute, degeneracy,\n\
probability-floor, trace-preserving, chi, mass.")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report entropies in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check input files without computing anything.
    Validate(ValidateArgs),
    /// Observational entropy of a state in a coarse-graining.
    Entropy(EntropyArgs),
    /// Quantum correlation entropy by local-basis search.
    Quarrelation(QuarrelationArgs),
    /// Compare projective and POVM quantum correlation entropies.
    QcPovmCompare(QcPovmArgs),
    /// Area-preserving map on a phase-space grid; writes `step,S_cg,S_gibbs`.
    ClassicalSim(ClassicalSimArgs),
    /// Closed-system entropy time series from a TOML or JSON config.
    ThermoSim(ThermoSimArgs),
    /// Runs the flagship experiments and writes their CSV files.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Coarse-graining file (partition, projectors, kraus or local).
    #[arg(long)]
    pub cg: Option<PathBuf>,
    /// Local POVM file: `{"subsystem_dims": [...], "factors": [[kraus...], ...]}`.
    #[arg(long)]
    pub local_povm: Option<PathBuf>,
    /// Thermo experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Phase-space file (grid, weights and a partition or chi set).
    #[arg(long)]
    pub phase_space: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long, required_unless_present = "phase_space")]
    pub state: Option<PathBuf>,
    /// Projective, local or Kraus coarse-graining.
    #[arg(long, conflicts_with = "seq")]
    pub cg: Option<PathBuf>,
    /// Kraus-operator coarse-graining (`"type": "kraus"`); projective files are accepted too.
    #[arg(long, conflicts_with_all = ["cg", "seq", "bath"])]
    pub povm: Option<PathBuf>,
    /// Sequence of projective coarse-grainings, applied in order.
    #[arg(long, num_args = 1..)]
    pub seq: Vec<PathBuf>,
    /// With `--seq`: use the common refinement of commuting coarse-grainings
    /// instead of applying them in order.
    #[arg(long, requires = "seq")]
    pub joint: bool,
    /// Reduce the state to these subsystems first, e.g. `0` or `0,2`.
    #[arg(long, value_delimiter = ',')]
    pub keep: Option<Vec<usize>>,
    /// Also report marginal entropies and mutual information (local only).
    #[arg(long)]
    pub decompose: bool,
    /// Also report slack in `S_VN ≤ S_C ≤ ln dim`.
    #[arg(long)]
    pub bound: bool,
    /// Bath model for `S_{C_S ⊗ C_E}`: `{"model": {...}, "binning": {...}}`; `--cg` is the system part.
    #[arg(long, requires = "cg")]
    pub bath: Option<PathBuf>,
    /// Classical phase-space input instead of a quantum state.
    #[arg(long, conflicts_with_all = ["state", "cg", "povm", "seq", "bath"])]
    pub phase_space: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuarrelationArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Subsystem dimensions, e.g. `2,2`; defaults to the state's own.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_sweeps: usize,
    /// Local coarse-graining to test `S_C ≥ S_VN + S_qc` against.
    #[arg(long)]
    pub cg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QcPovmArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// POVM outcomes per subsystem, e.g. `3,3`.
    #[arg(long, value_delimiter = ',')]
    pub outcomes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 4)]
    pub povm_restarts: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassicalSimArgs {
    /// `baker`, `cat`, `standard` or `standard:<k>`.
    #[arg(long, default_value = "baker")]
    pub map: String,
    /// Kicking strength of the standard map.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// `quadrants`, `halves`, `fine` or `blocks<b>`.
    #[arg(long, default_value = "quadrants")]
    pub partition: String,
    /// Cells per side of the unit torus.
    #[arg(long, default_value_t = 64)]
    pub cells: usize,
    /// `left_half`, `corner` or `uniform`.
    #[arg(long, default_value = "left_half")]
    pub initial: String,
    /// `auto`, `permutation` or `supersampled:<s>`.
    #[arg(long, default_value = "auto")]
    pub transport: String,
    /// JSON/TOML config replacing the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "classical.csv")]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThermoSimArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.csv` of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Output directory.
    #[arg(long, default_value = "demo-out")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
}

/// Splits `--tol-<name> <value>` / `--tol-<name>=<value>` out of `argv`.
fn extract_tolerances(args: Vec<OsString>) -> CliResult<(Vec<OsString>, Tolerances)> {
    let mut tol = Tolerances::default();
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let text = arg.to_string_lossy().into_owned();
        let Some(spec) = text.strip_prefix("--tol-") else {
            rest.push(arg);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| CliError::Usage(format!("--tol-{spec} needs a value")))?;
                (spec.to_string(), v.to_string_lossy().into_owned())
            }
        };
        let value: f64 = value.parse().map_err(|_| CliError::Usage(format!("--tol-{name}: `{value}` is not a number")))?;
        if !(value >= 0.0) {
            return Err(CliError::Usage(format!("--tol-{name} must be nonnegative")));
        }
        tol.set(&name, value).map_err(CliError::Usage)?;
    }
    Ok((rest, tol))
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let (args, tol) = match extract_tolerances(args) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, &tol) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, tol: &Tolerances) -> CliResult<()> {
    if let Some(n) = cli.threads {
        // A second call in the same process keeps the first pool, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let ctx = commands::Context { seed: cli.seed, bits: cli.bits, tol: *tol };
    match &cli.command {
        Command::Validate(a) => commands::validate(&ctx, a),
        Command::Entropy(a) => commands::entropy(&ctx, a),
        Command::Quarrelation(a) => commands::quarrelation(&ctx, a),
        Command::QcPovmCompare(a) => commands::qc_povm_compare(&ctx, a),
        Command::ClassicalSim(a) => commands::classical_sim(&ctx, a),
        Command::ThermoSim(a) => commands::thermo_sim(&ctx, a),
        Command::Demo(a) => demo::demo(&ctx, a),
    }
}
