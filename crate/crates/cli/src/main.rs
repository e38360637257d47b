//! `bellkit` command-line tool.

mod commands;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::output::Printer;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bellkit::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into().display().to_string(), source }
    }

    /// 2 usage, 3 guard violation, 4 numerical failure.
    pub fn exit_code(&self) -> u8 {
        use bellkit::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Json(_) => 2,
            CliError::Core(e) => match e {
                E::UnknownFunctional(_) | E::InvalidConfig(_) | E::Json(_) | E::Fixture(_) => 2,
                E::LpFailure(_) | E::InfeasibleCorrelators { .. } => 4,
                E::InvalidProbability(_)
                | E::SignalingDetected { .. }
                | E::ScenarioMismatch { .. }
                | E::OutOfRangeTau(_)
                | E::InvalidN(_)
                | E::TooManySettings(_)
                | E::InvalidObservable(_)
                | E::InvalidState(_)
                | E::InvalidSetting(_)
                | E::SignalingInput(_)
                | E::MissingSettings { .. }
                | E::EmptySettingPair { .. } => 3,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bellkit", version, about = "Bell inequality bounds, qubit optima and experiment simulation")]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Output file (directory for `simulate`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seesaw convergence tolerance on the value change.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Significant digits in text output.
    #[arg(long, global = true)]
    pub digits: Option<usize>,
    /// JSON file with defaults for the global flags (same names).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    json: Option<bool>,
    out: Option<PathBuf>,
    tol: Option<f64>,
    digits: Option<usize>,
}

/// Global options after merging the config file under the flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub json: bool,
    pub out: Option<PathBuf>,
    pub tol: f64,
    pub digits: usize,
}

impl Settings {
    fn resolve(cli: &Cli) -> CliResult<Self> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let tol = cli.tol.or(file.tol).unwrap_or(bellkit::optimize::SeesawConfig::default().tol);
        if !(tol > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
        }
        let digits = cli.digits.or(file.digits).unwrap_or(6);
        if digits == 0 || digits > 17 {
            return Err(CliError::Usage(format!("--digits must be in 1..=17, got {digits}")));
        }
        Ok(Self {
            seed: cli.seed.or(file.seed).unwrap_or(0),
            json: cli.json || file.json.unwrap_or(false),
            out: cli.out.clone().or(file.out),
            tol,
            digits,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct FunctionalArgs {
    /// Built-in functional: chsh, chsh_prime, tilted, chained, m3322, m4322, elegant.
    #[arg(long, conflicts_with = "file")]
    pub name: Option<String>,
    /// Tilting parameter for `tilted`.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Number of settings for `chained`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Functional in JSON form ({name, nA, nB, c, mA, mB, offset, direction}).
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundKind {
    Local,
    Algebraic,
    Lplus1pr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RestrictionArg {
    None,
    Planar,
    Mes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Tsirelson,
    PrBox,
    Uniform,
    Chained,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExperimentArg {
    Circle,
    Chained,
    Tilted,
    M3322,
    M4322,
    Elegant,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub experiment: ExperimentArg,
    /// Circle points.
    #[arg(long, default_value_t = 180)]
    pub points: usize,
    /// Largest chained n.
    #[arg(long, default_value_t = 45)]
    pub nmax: usize,
    /// Comma-separated tilting parameters.
    #[arg(long, value_delimiter = ',')]
    pub taus: Vec<f64>,
    /// Take taus and state angles from a bundled table (table2).
    #[arg(long)]
    pub from_fixture: Option<String>,
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Fraction of the visibility loss that is white noise (rest is dephasing).
    #[arg(long)]
    pub white: Option<f64>,
    /// Setting jitter, degrees on the Bloch sphere.
    #[arg(long)]
    pub jitter_deg: Option<f64>,
    /// Coincidences per second.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Seconds per setting pair (overrides the per-experiment default).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Seesaw restarts for the tilted settings.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Acquire setting pairs in natural order.
    #[arg(long)]
    pub no_randomize: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Local, algebraic or local-plus-one-PR-box bound with a witness.
    Bound {
        #[command(flatten)]
        functional: FunctionalArgs,
        #[arg(long, value_enum, default_value = "local")]
        kind: BoundKind,
    },
    /// Seesaw lower bound on the two-qubit optimum.
    Qmax {
        #[command(flatten)]
        functional: FunctionalArgs,
        #[arg(long, value_enum, default_value = "none")]
        restriction: RestrictionArg,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Fix the state to cos t|00> + sin t|11> (degrees).
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Minimal nonlocal content of a no-signaling behavior.
    Epr2 {
        /// Behavior JSON ({nA, nB, p[a][b][x][y]}).
        #[arg(long, conflicts_with = "preset")]
        behavior: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Settings per party for the chained preset.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Nonlocal content and predictability from a chained value.
    Chained {
        /// Observed I_n.
        #[arg(long)]
        value: Option<f64>,
        /// Largest marginal bias.
        #[arg(long, default_value_t = 0.0)]
        bias: f64,
        /// Ideal quantum I_n for this n.
        #[arg(long)]
        n: Option<usize>,
        /// Recompute the predictability column of the bundled chained table.
        #[arg(long)]
        table: bool,
    },
    /// Simulate one of the reference experiments and write counts and tables.
    Simulate(SimulateArgs),
    /// Markdown comparison of computed and simulated results against the bundled tables.
    Report {
        /// Seesaw restarts (MES searches use eight times as many).
        #[arg(long)]
        restarts: Option<usize>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let settings = Settings::resolve(&cli)?;
    let mut printer = Printer::new(&settings);
    match cli.command {
        Command::Bound { functional, kind } => commands::bound(&settings, &mut printer, &functional, kind),
        Command::Qmax { functional, restriction, restarts, max_iters, theta } => {
            commands::qmax(&settings, &mut printer, &functional, restriction, restarts, max_iters, theta)
        }
        Command::Epr2 { behavior, preset, n } => commands::epr2(&mut printer, behavior, preset, n),
        Command::Chained { value, bias, n, table } => commands::chained(&mut printer, value, bias, n, table),
        Command::Simulate(args) => commands::simulate(&settings, &mut printer, &args),
        Command::Report { restarts } => report::run(&settings, &mut printer, restarts),
    }?;
    printer.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
