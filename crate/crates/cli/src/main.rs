//! `photosub` command-line front end: figure datasets and custom sweeps as CSV.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use photosub::sweep::{
    run_figure, run_sweep, FigureId, OracleSpec, Overrides, SweepQuantity, SweepSpec, Table,
    DEFAULT_SEED, DEFAULT_TRIALS,
};
use photosub::{BranchMeasurement, Measurement};

use config::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] photosub::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 2,
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "photosub",
    version,
    about = "Fisher-information datasets for photon-subtracted thermal light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dataset for one figure (fig1 .. fig7).
    Figure {
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Custom sweep over the lambda grid.
    Sweep {
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// Measurement on both branches for `--quantity total`.
        #[arg(long, value_enum, default_value = "photon")]
        branch: Branch,
        /// Append Monte Carlo estimates of the success probability and accepted mean.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Quantity {
    Total,
    Rates,
    Branches,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Branch {
    Photon,
    Het,
    Hom,
    Onoff,
}

#[derive(Debug, Args)]
struct Common {
    /// key = value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Beam-splitter transmittance (default 0.95).
    #[arg(long)]
    eta: Option<f64>,
    /// Herald on-off efficiency (default per figure: 0.97 or 0.99).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Preparation cost (default 1).
    #[arg(long)]
    cp: Option<f64>,
    /// Selection cost (default 0.5).
    #[arg(long)]
    cs: Option<f64>,
    /// Measurement cost (default 10).
    #[arg(long)]
    cm: Option<f64>,
    /// Log-spaced grid as min:max:points.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed (default 1).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per grid point (default 100000).
    #[arg(long)]
    trials: Option<u64>,
    /// Measurement on the heralded branch for rates: het or hom.
    #[arg(long)]
    accepted_meas: Option<String>,
    /// Also write <out>.diag.csv with the engine behind every FI cell.
    #[arg(long)]
    diagnostics: bool,
    /// Add the compact post-selected rate column.
    #[arg(long)]
    compact: bool,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let flags = Settings {
            eta: self.eta,
            epsilon: self.epsilon,
            cp: self.cp,
            cs: self.cs,
            cm: self.cm,
            grid: self.grid.as_deref().map(str::parse).transpose()?,
            out: self.out.clone(),
            seed: self.seed,
            trials: self.trials,
            accepted_meas: self.accepted_meas.as_deref().map(str::parse).transpose()?,
            diagnostics: self.diagnostics.then_some(true),
            compact: self.compact.then_some(true),
        };
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                config::parse(&text)?
            }
            None => Settings::default(),
        };
        Ok(flags.or(file))
    }
}

fn overrides(s: &Settings) -> Overrides {
    Overrides {
        eta: s.eta,
        epsilon: s.epsilon,
        c_prep: s.cp,
        c_select: s.cs,
        c_measure: s.cm,
        grid: s.grid,
        accepted: s.accepted_meas,
        compact: s.compact.unwrap_or(false),
    }
}

fn diagnostics_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".diag.csv");
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn emit(table: &Table, s: &Settings) -> Result<()> {
    match &s.out {
        Some(out) => {
            write_file(out, &table.to_csv())?;
            if s.diagnostics.unwrap_or(false) {
                write_file(&diagnostics_path(out), &table.diagnostics_csv())?;
            }
        }
        None => {
            std::io::stdout()
                .lock()
                .write_all(table.to_csv().as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    Ok(())
}

fn check_diagnostics(s: &Settings) -> Result<()> {
    if s.diagnostics == Some(true) && s.out.is_none() {
        return Err(CliError::Usage("--diagnostics requires --out".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Figure { id, common } => {
            let fig: FigureId = id.parse()?;
            let s = common.settings()?;
            check_diagnostics(&s)?;
            emit(&run_figure(fig, &overrides(&s))?, &s)
        }
        Command::Sweep {
            quantity,
            branch,
            oracle,
            common,
        } => {
            let s = common.settings()?;
            check_diagnostics(&s)?;
            let o = overrides(&s);
            let quantity = match quantity {
                Quantity::Total => {
                    let m = match branch {
                        Branch::Photon => Measurement::PhotonNumber,
                        Branch::Het => Measurement::HeterodyneRadial,
                        Branch::Hom => Measurement::Homodyne,
                        Branch::Onoff => Measurement::on_off(s.epsilon.unwrap_or(0.99))?,
                    };
                    SweepQuantity::TotalInformation(BranchMeasurement::both(m))
                }
                Quantity::Rates => SweepQuantity::Rates,
                Quantity::Branches => SweepQuantity::Branches,
            };
            let spec = SweepSpec {
                quantity,
                overrides: o,
                oracle: oracle.then(|| OracleSpec {
                    trials: s.trials.unwrap_or(DEFAULT_TRIALS),
                    seed: s.seed.unwrap_or(DEFAULT_SEED),
                }),
            };
            emit(&run_sweep(&spec)?, &s)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
