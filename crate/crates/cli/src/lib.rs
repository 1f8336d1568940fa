//! Command-line front end for the NBP toolkit.
//!
//! Every command that produces files also writes a run manifest (resolved
//! argument vector, code identity, seeds, output list) sufficient to
//! reproduce the run via `nbp rerun <manifest>`.
//!
//! Exit codes: 0 success, 2 usage, 3 validation/safety, 4 numeric
//! precondition failure.

mod cmd_bound;
mod cmd_code;
mod cmd_dataset;
mod cmd_sweep;
mod cmd_train;
mod manifest;

pub use manifest::{CodeIdentity, OutputEntry, RunManifest};

use clap::{Args, Parser, Subcommand};
use nbp_core::bounds::BoundError;
use nbp_core::channel::ChannelError;
use nbp_core::code_graph::CodeGraphError;
use nbp_core::decoder::DecoderError;
use nbp_core::training::TrainError;
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "NBP_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<CodeGraphError> for CliError {
    fn from(e: CodeGraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<DecoderError> for CliError {
    fn from(e: DecoderError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::VacuousLogArgument(_)
            | BoundError::EmptyGrid(_)
            | BoundError::InconsistentRate(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(format!("json error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "nbp",
    version,
    about = "Neural belief propagation decoders: codes, datasets, training, gap sweeps, and generalization bounds"
)]
pub struct Cli {
    /// Output directory for generated files (default: $NBP_OUT_DIR or the
    /// current directory)
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 1 forces fully sequential execution
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Inspect, construct, and transform parity-check codes
    Code {
        #[command(subcommand)]
        sub: cmd_code::CodeCmd,
    },
    /// Generate and export channel datasets
    Dataset {
        #[command(subcommand)]
        sub: cmd_dataset::DatasetCmd,
    },
    /// Train decoder weights and write a checkpoint
    Train(cmd_train::TrainArgs),
    /// Evaluate a checkpoint's empirical BER
    Eval(cmd_train::EvalArgs),
    /// Verify analytic gradients against central finite differences
    Gradcheck(cmd_train::GradcheckArgs),
    /// Train/test gap sweeps over m, T, beta, or blocklength
    GapSweep(cmd_sweep::GapSweepArgs),
    /// Closed-form generalization bounds and figure data
    Bound {
        #[command(subcommand)]
        sub: cmd_bound::BoundCmd,
    },
    /// Re-execute a recorded run from its manifest
    Rerun(RerunArgs),
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    /// Path to a run manifest written by a previous command
    pub manifest: PathBuf,
}

/// Execution context shared by the commands.
pub struct Ctx {
    pub out_dir: PathBuf,
    pub argv: Vec<String>,
    pub sequential: bool,
}

impl Ctx {
    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn resolve_out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn configure_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        // may already be set (e.g. rerun recursion); that is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

/// Run the CLI on an argument vector (without the program name). Returns the
/// process exit code.
pub fn run_cli(args: &[String]) -> i32 {
    let mut argv = vec!["nbp".to_string()];
    argv.extend_from_slice(args);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/version output
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli, args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, raw_args: &[String]) -> Result<(), CliError> {
    configure_threads(cli.threads);
    let ctx = Ctx {
        out_dir: resolve_out_dir(&cli.out_dir),
        argv: raw_args.to_vec(),
        sequential: cli.threads == Some(1),
    };
    std::fs::create_dir_all(&ctx.out_dir)?;
    match cli.command {
        Command::Code { sub } => cmd_code::run(&ctx, sub),
        Command::Dataset { sub } => cmd_dataset::run(&ctx, sub),
        Command::Train(args) => cmd_train::run_train(&ctx, args),
        Command::Eval(args) => cmd_train::run_eval(&ctx, args),
        Command::Gradcheck(args) => cmd_train::run_gradcheck(&ctx, args),
        Command::GapSweep(args) => cmd_sweep::run(&ctx, args),
        Command::Bound { sub } => cmd_bound::run(&ctx, sub),
        Command::Rerun(args) => run_rerun(args, cli.out_dir),
    }
}

fn run_rerun(args: RerunArgs, out_dir_override: Option<PathBuf>) -> Result<(), CliError> {
    let manifest = manifest::RunManifest::load(&args.manifest)?;
    let mut argv = manifest.command.clone();
    if let Some(dir) = out_dir_override {
        let dir = dir.display().to_string();
        // replace the recorded output directory with the override
        let mut rewritten = false;
        let mut i = 0;
        while i < argv.len() {
            if argv[i] == "--out-dir" && i + 1 < argv.len() {
                argv[i + 1] = dir.clone();
                rewritten = true;
            } else if argv[i].starts_with("--out-dir=") {
                argv[i] = format!("--out-dir={dir}");
                rewritten = true;
            }
            i += 1;
        }
        if !rewritten {
            argv.push("--out-dir".to_string());
            argv.push(dir);
        }
    }
    let code = run_cli(&argv);
    if code == 0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "rerun of {} exited with code {code}",
            args.manifest.display()
        )))
    }
}

// shared helpers for the command modules

pub(crate) fn load_code(path: &Path) -> Result<nbp_core::CodeGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(nbp_core::code_graph::parse_alist(&text)?)
}

pub(crate) fn parse_mode(s: &str) -> Result<nbp_core::decoder::CheckMode, CliError> {
    s.parse().map_err(CliError::Usage)
}

pub(crate) fn noise_spec(
    beta: Option<f64>,
    snr_db: Option<f64>,
) -> Result<nbp_core::channel::NoiseSpec, CliError> {
    match (beta, snr_db) {
        (Some(b), None) => Ok(nbp_core::channel::NoiseSpec::Beta(b)),
        (None, Some(db)) => Ok(nbp_core::channel::NoiseSpec::SnrDb(db)),
        _ => Err(CliError::Usage(
            "exactly one of --beta and --snr-db is required".to_string(),
        )),
    }
}

pub(crate) fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let items: Result<Vec<T>, CliError> = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|e| CliError::Usage(format!("bad {what} entry {tok:?}: {e}")))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("empty {what} list")));
    }
    Ok(items)
}
