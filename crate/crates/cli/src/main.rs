//! `opdyn`: experiments on delayed opinion dynamics over signed networks.

mod commands;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

pub use output::Format;

#[derive(Debug)]
pub enum CliError {
    /// Unusable input files or parameters (exit 3).
    Validation(String),
    /// A numerical routine failed or its precondition does not hold (exit 4).
    Numerical(String),
}

impl From<delayed_opinions::Error> for CliError {
    fn from(e: delayed_opinions::Error) -> Self {
        use delayed_opinions::Error as E;
        match e {
            E::InvalidInput(_)
            | E::MixedSignCrossing { .. }
            | E::InvalidProportions(_)
            | E::ZeroRow(_)
            | E::StepTooLarge { .. }
            | E::DelayOutOfRange { .. } => CliError::Validation(e.to_string()),
            E::NoConvergence(_)
            | E::DegenerateMean
            | E::NotConvergent(_)
            | E::PoorFit(_)
            | E::PositiveRealPart { .. }
            | E::NoCrossover => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "opdyn", version, about)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (a directory for `reproduce`); standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Layout of tabular output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Suppress status messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Random,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Prediction {
    Circular,
    Ellipse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    #[value(name = "example-2")]
    Example2,
    #[value(name = "example-3")]
    Example3,
    #[value(name = "example-4")]
    Example4,
    #[value(name = "example-5")]
    Example5,
    #[value(name = "example-6")]
    Example6,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a row-normalized random signed network.
    Generate {
        #[arg(long)]
        n: usize,
        /// Connection probability.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = Mode::Random)]
        mode: Mode,
        /// Shares of (+/+), (-/-), (+/-), (+/0), (-/0), comma separated.
        #[arg(long, value_delimiter = ',')]
        proportions: Option<Vec<f64>>,
        /// Also write the generating parameters, for `spectrum --stats`.
        #[arg(long)]
        spec_out: Option<PathBuf>,
    },
    /// Eigenvalues of a matrix, optionally against the random-matrix prediction.
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, requires = "stats")]
        predict: Option<Prediction>,
        /// Mixture parameters written by `generate --spec-out`.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Iterate the delayed discrete dynamics.
    SimulateDiscrete {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        tau_d: usize,
        /// Comma-separated opinions, or `uniform-seed:N`. Defaults to a draw
        /// from the global seed.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// Step budget; derived from the spectral rate when absent.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Integrate the delayed continuous dynamics on the network's Laplacian.
    SimulateContinuous {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tau_c: f64,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
    },
    /// Delay margin, crossover delay and acceleration flag of the Laplacian.
    Thresholds {
        #[arg(long = "in")]
        input: PathBuf,
        /// Mixture parameters; adds the closed-form margin.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Predicted continuous decay rate over delays in [0, τ*).
    RateSweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Stability boundary for delay τ in polar and Cartesian form.
    BoundaryCurve {
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Cover the whole left half-plane instead of (3π/4, 5π/4).
        #[arg(long)]
        full_range: bool,
    },
    /// Check the network/augmented-network correspondence on random graphs.
    VerifyLemmas {
        /// Largest graph size drawn.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Largest delay drawn.
        #[arg(long, default_value_t = 4)]
        tau_d: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Rerun a bundled experiment.
    Reproduce {
        #[arg(value_enum)]
        example: Example,
    },
}

pub struct Globals {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub quiet: bool,
}

impl Globals {
    pub fn status(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = Globals {
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Generate {
            n,
            p,
            sigma,
            mode,
            proportions,
            spec_out,
        } => commands::generate(&g, n, p, sigma, mode, proportions, spec_out),
        Command::Spectrum {
            input,
            predict,
            stats,
        } => commands::spectrum(&g, &input, predict, stats.as_deref()),
        Command::SimulateDiscrete {
            input,
            tau_d,
            x0,
            steps,
            tol,
        } => commands::simulate_discrete(&g, &input, tau_d, x0.as_deref(), steps, tol),
        Command::SimulateContinuous {
            input,
            tau_c,
            dt,
            horizon,
            x0,
        } => commands::simulate_continuous(&g, &input, tau_c, dt, horizon, x0.as_deref()),
        Command::Thresholds { input, stats } => commands::thresholds(&g, &input, stats.as_deref()),
        Command::RateSweep { input, samples } => commands::rate_sweep(&g, &input, samples),
        Command::BoundaryCurve {
            tau,
            points,
            full_range,
        } => commands::boundary_curve(&g, tau, points, full_range),
        Command::VerifyLemmas { n, tau_d, trials } => commands::verify_lemmas(&g, n, tau_d, trials),
        Command::Reproduce { example } => reproduce::run(&g, example),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
