//! Command-line surface for the sideband-statistics crates.
//!
//! Subcommands: `derive`, `g2-curve`, `g3-points`, `region`,
//! `oracle-compare`, `filter-response`. Each accepts `--config <path>`
//! plus overrides; outputs are deterministic (config-hash stamped, no
//! timestamps). Exit codes: 0 success, 2 configuration error, 3
//! physics-domain error (instability, undefined quantity), 4 tolerance
//! or truncation failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Physics(sideband_stats::Error),
    Tolerance(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Physics(e) => write!(f, "{e}"),
            CliError::Tolerance(msg) => write!(f, "tolerance failure: {msg}"),
        }
    }
}

impl From<sideband_stats::Error> for CliError {
    fn from(e: sideband_stats::Error) -> Self {
        CliError::Physics(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use sideband_stats::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(e) => match e {
                E::InvalidParams(_) => 2,
                E::Instability { .. } | E::Domain(_) | E::ZeroFlux | E::NonUniqueSteadyState { .. } => 3,
                E::Truncation(_) | E::Propagation(_) | E::ThresholdSearch(_) | E::Linalg(_) => 4,
            },
            CliError::Tolerance(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sideband-stats",
    version,
    about = "Sideband photon statistics of a two-tone driven optomechanical cavity"
)]
struct Cli {
    /// TOML run configuration; built-in ideal defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the drive ratio β (ideal mode) or rescale g_b (physical).
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Override the phonon occupation n_m (ideal mode only).
    #[arg(long, global = true)]
    nm: Option<f64>,
    /// Override γ̃/δ (ideal mode only).
    #[arg(long = "gamma-eff", global = true)]
    gamma_eff: Option<f64>,
    /// Override the half sideband splitting δ.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derived backaction quantities and validity diagnostics.
    Derive,
    /// Sampled g²(τ) curve as CSV (grid snapped to π/2δ multiples).
    G2Curve {
        /// Largest delay on the grid.
        #[arg(long, default_value_t = 60.0)]
        tau_max: f64,
        /// Requested number of grid points (>= 2).
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// g³ and K at τ = 0 and τ = π/2δ (strict limit and with decay).
    G3Points,
    /// K map over (β, n_m) or (β, n_m⁽⁰⁾) with refined thresholds.
    Region {
        /// "k0" (equal time) or "kdelay" (quarter delay).
        #[arg(long)]
        criterion: Option<String>,
        /// "nm" or "nm0".
        #[arg(long)]
        axes: Option<String>,
    },
    /// Closed forms vs the truncated-Fock regression oracle.
    OracleCompare {
        /// Comma-separated grid reused for both β and n_m.
        #[arg(long)]
        points: Option<String>,
    },
    /// Filter transfer functions and passband diagnostics as CSV.
    FilterResponse {
        /// Half-width of the frequency window.
        #[arg(long, default_value_t = 0.5)]
        omega_max: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("SIDEBAND_STATS_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        beta: cli.beta,
        nm: cli.nm,
        gamma_eff: cli.gamma_eff,
        delta: cli.delta,
    };
    let config = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Derive => commands::derive::run(&config, out),
        Command::G2Curve { tau_max, points } => commands::g2_curve::run(&config, tau_max, points, out),
        Command::G3Points => commands::g3_points::run(&config, out),
        Command::Region { criterion, axes } => commands::region::run(&config, criterion, axes, out),
        Command::OracleCompare { points } => commands::oracle_compare::run(&config, points, out),
        Command::FilterResponse { omega_max, points } => {
            commands::filter_response::run(&config, omega_max, points, out)
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
