mod commands;
mod format;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use sublorentz::brenier::BrenierError;
use sublorentz::io::IoError;
use sublorentz::minkowski::MinkowskiError;
use sublorentz::transport::{CostParams, TransportError};

#[derive(Debug, Parser)]
#[command(name = "sublorentz", version, about = "Sub-Lorentzian Heisenberg geometry and Lorentzian optimal transport")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Cost exponent, strictly between 0 and 1.
    #[arg(long = "p", global = true, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance used for support extraction and pass/fail checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Output file for CSV or measure data.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write an SVG plot to this path.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Significant digits in printed numbers.
    #[arg(long, global = true, default_value_t = 9)]
    pub digits: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time separation and causal relation of two points.
    Tau {
        #[arg(long, value_parser = format::parse_triple, allow_hyphen_values = true)]
        from: [f64; 3],
        #[arg(long, value_parser = format::parse_triple, allow_hyphen_values = true)]
        to: [f64; 3],
    },
    /// Sample a geodesic as a `t,x,y,z` trajectory.
    Geodesic {
        #[arg(long, value_parser = format::parse_triple, allow_hyphen_values = true)]
        from: [f64; 3],
        /// Initial covector (h_X, h_Y, h_Z) in the left-invariant frame.
        #[arg(long, value_parser = format::parse_triple, allow_hyphen_values = true)]
        cov: [f64; 3],
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Number of rows, including both endpoints.
        #[arg(long, default_value_t = 101)]
        n: usize,
    },
    /// Initial covector of the geodesic between two chronological points.
    Logmap {
        #[arg(long, value_parser = format::parse_triple, allow_hyphen_values = true)]
        from: [f64; 3],
        #[arg(long, value_parser = format::parse_triple, allow_hyphen_values = true)]
        to: [f64; 3],
    },
    /// Solve the discrete Kantorovich problem between two measure files.
    Solve {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
    },
    /// Brenier map of the solved problem and its displacement interpolants.
    Brenier {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        /// Comma-separated interpolation times in [0, 1].
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
        times: Vec<f64>,
    },
    /// Write the displacement interpolant at time t as a measure file.
    Interpolate {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Compare right translation by q0 with the optimal coupling.
    RightTranslation {
        #[arg(long, value_parser = format::parse_triple, allow_hyphen_values = true)]
        q0: [f64; 3],
        /// Source measure; a seeded loop instance is generated when absent.
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long, default_value_t = 48)]
        vertices: usize,
    },
    /// Run the seeded self-check suites.
    Verify,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Parse(String),
    #[error("I/O failure: {0}")]
    Io(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Io(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<TransportError> for CliError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::NoCausalCoupling => CliError::Infeasible("NoCausalCoupling".into()),
            TransportError::InvalidExponent(_) | TransportError::InvalidMeasure(_) => CliError::Parse(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<BrenierError> for CliError {
    fn from(e: BrenierError) -> Self {
        match e {
            BrenierError::Transport(t) => t.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<MinkowskiError> for CliError {
    fn from(e: MinkowskiError) -> Self {
        match e {
            MinkowskiError::Transport(t) => t.into(),
            MinkowskiError::InvalidMeasure(m) => CliError::Parse(m),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl GlobalOpts {
    pub fn params(&self) -> Result<CostParams, CliError> {
        Ok(CostParams::new(self.p)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match commands::run(&cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
