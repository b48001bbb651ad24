use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Command, GroundStateMode, ModelChoice, RunConfig};

/// Mean-field dynamics, phase diagrams, ground states and quantum indicators
/// of a bosonic Josephson junction in a driven optical cavity.
#[derive(Parser, Debug)]
#[command(name = "bjj", version)]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads for grid computations (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress to stderr
    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Integrate the mean-field equations and classify the regime
    Dynamics(DynamicsFlags),
    /// Evaluate the self-trapping criterion on a grid
    PhaseDiagram(PhaseDiagramFlags),
    /// Ground-state coefficients of the two-mode Hamiltonian
    GroundState(GroundStateFlags),
    /// Indicator curves along a U grid and their entropy peaks
    Sweep,
    /// Small-oscillation frequency against photon number
    Frequency,
}

#[derive(Args, Debug)]
struct DynamicsFlags {
    #[arg(long)]
    z0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    #[arg(long)]
    xi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi0: Option<f64>,
    #[arg(long = "photon_number")]
    photon_number: Option<f64>,
    #[arg(long = "t_end", allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "model_kind")]
    model_kind: Option<ModelChoice>,
}

#[derive(Args, Debug)]
struct PhaseDiagramFlags {
    #[arg(long = "photon_number")]
    photon_number: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    fixed: Option<f64>,
}

#[derive(Args, Debug)]
struct GroundStateFlags {
    #[arg(long)]
    mode: Option<GroundStateMode>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration ({field}): {reason}")]
    Config { field: String, reason: String },
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] bjj_core::Error),
    #[error("{failed} of {total} sweep points failed; see {manifest}")]
    PartialSweep {
        failed: usize,
        total: usize,
        manifest: PathBuf,
    },
}

impl CliError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use bjj_core::ErrorKind;
        match self {
            CliError::Config { .. } | CliError::Output { .. } => 2,
            CliError::PartialSweep { .. } => 3,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Analysis => 4,
            },
        }
    }
}

fn apply_overrides(cfg: &mut RunConfig, sub: &Sub) -> Result<(), CliError> {
    match (&mut cfg.command, sub) {
        (Command::Dynamics(o), Sub::Dynamics(f)) => {
            o.z0 = f.z0.unwrap_or(o.z0);
            o.theta0 = f.theta0.unwrap_or(o.theta0);
            o.xi0 = f.xi0.or(o.xi0);
            o.phi0 = f.phi0.or(o.phi0);
            o.photon_number = f.photon_number.or(o.photon_number);
            o.t_end = f.t_end.unwrap_or(o.t_end);
            o.dt = f.dt.unwrap_or(o.dt);
            o.model_kind = f.model_kind.unwrap_or(o.model_kind);
        }
        (Command::PhaseDiagram(o), Sub::PhaseDiagram(f)) => {
            o.photon_number = f.photon_number.unwrap_or(o.photon_number);
            o.fixed = f.fixed.unwrap_or(o.fixed);
        }
        (Command::GroundState(o), Sub::GroundState(f)) => {
            o.mode = f.mode.unwrap_or(o.mode);
        }
        (Command::Sweep(_), Sub::Sweep) | (Command::Frequency(_), Sub::Frequency) => {}
        (c, _) => {
            return Err(CliError::config(
                "command",
                format!("configuration is for `{}`, not this subcommand", c.name()),
            ))
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("config", "--config <path> is required"))?;
    let mut cfg = RunConfig::load(path)?;
    apply_overrides(&mut cfg, &cli.command)?;
    cfg.validate()?;

    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|source| CliError::Output {
        path: cli.out.clone(),
        source,
    })?;
    commands::run(&cfg, &cli.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
