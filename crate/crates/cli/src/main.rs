//! `gamow`: runs kernel checks, energies, minimizations, sweeps, lens grid
//! checks and cut and paste from a TOML run configuration.
//!
//! Exit codes: 0 pass, 1 check failed, 2 config error, 3 partial failure.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::Output;

#[derive(Debug)]
pub enum CliError {
    /// Bad config, override, or input file.
    Config(String),
    /// A computation failed outright.
    Failed(String),
}

impl CliError {
    pub fn config(e: gamow::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Failed(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

/// Library errors during a run: bad inputs are config errors, anything
/// else is a failed computation.
impl From<gamow::Error> for CliError {
    fn from(e: gamow::Error) -> Self {
        use gamow::Error as E;
        match e {
            E::Argument(_) | E::Parse(_) | E::Precondition(_) | E::Domain(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Failed(e.to_string()),
        }
    }
}

/// Result of a subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    CheckFailed,
    Partial,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
            Status::Partial => 3,
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::CheckFailed
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "gamow",
    version,
    about = "Perimeter plus nonlocal interaction energies of planar sets"
)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: config `out`, else ./gamow-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random choice; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Set a config key, e.g. `quadrature.rel_tol=1e-10`. Repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VAL", global = true)]
    tol_override: Vec<String>,
    /// Worker threads for parallel quadrature.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Admissibility, Lipschitz, monotonicity and positive definiteness checks.
    KernelCheck,
    /// Energy of the configured components at each ε.
    Energy,
    /// Single, generalized or ball-minimality minimization.
    Minimize,
    /// Fission sweep over the configured ε list.
    Sweep {
        /// Continue from the rows already in `sweep.csv`.
        #[arg(long)]
        resume: bool,
    },
    /// Lens inequality and derivative identities on a grid.
    LensVerify,
    /// Cut and paste on a raster band.
    CutPaste,
    /// Summarize the results already in the output directory.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::KernelCheck => "kernel-check",
            Command::Energy => "energy",
            Command::Minimize => "minimize",
            Command::Sweep { .. } => "sweep",
            Command::LensVerify => "lens-verify",
            Command::CutPaste => "cut-paste",
            Command::Report => "report",
        }
    }
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let name = cli.command.name();
    let cfg: RunConfig = config::load(cli.config.as_deref(), &cli.tol_override, cli.seed)?;
    if let Some(op) = &cfg.operation {
        if op != name {
            return Err(CliError::Config(format!(
                "config is for {op:?}, not {name:?}"
            )));
        }
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("gamow-out"));
    let out = Output::new(&dir, config::config_hash(&cfg, name), name)?;
    let clock = Instant::now();
    let status = match &cli.command {
        Command::KernelCheck => commands::kernel_check(&cfg, &out),
        Command::Energy => commands::energy(&cfg, &out),
        Command::Minimize => commands::minimize(&cfg, &out),
        Command::Sweep { resume } => commands::sweep(&cfg, &out, *resume),
        Command::LensVerify => commands::lens_verify(&cfg, &out),
        Command::CutPaste => commands::cut_paste(&cfg, &out),
        Command::Report => commands::report(&out),
    }?;
    out.timing(clock.elapsed().as_secs_f64())?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("gamow: config error: {m}"),
                CliError::Failed(m) => eprintln!("gamow: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
