//! `scaledrive`: design counter-diabatic trap-driving protocols, propagate
//! them, and validate the implementation against its analytic oracles.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O
//! failure.

// Parameter checks use `!(x > 0.0)` so NaN fails validation; `x <= 0.0`
// would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use scaledrive_core::Error;

#[derive(Parser)]
#[command(
    name = "scaledrive",
    about = "Counter-diabatic driving protocols for time-dependent traps",
    long_about = "Designs counter-diabatic trap-frequency protocols, propagates the \
                  corresponding linear or Gross-Pitaevskii dynamics, and validates the \
                  implementation against analytic scaling oracles. Natural units \
                  throughout: hbar = m = 1, frequencies in omega0, times in 1/omega0, \
                  lengths in oscillator lengths of omega0."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a driving protocol and write its tables
    Design(DesignArgs),
    /// Propagate one expansion and write a run directory
    Simulate(SimulateArgs),
    /// Tabulate bare and CD drive curves for several durations
    Figure1(Figure1Args),
    /// Tabulate CD-vs-bare final fidelities across durations
    Sweep(SweepArgs),
    /// Run the power-law/piston expansion demo
    Piston(PistonArgs),
    /// Run the validation suite and print one line per check
    Validate(ValidateArgs),
}

/// Frequency-ramp parameters shared by protocol-driven commands.
#[derive(Args, Debug)]
struct RampArgs {
    /// Initial trap frequency (sets the frequency unit; hbar = m = 1)
    #[arg(long = "omega0", value_name = "FREQ", allow_negative_numbers = true)]
    omega0: Option<f64>,
    /// Final trap frequency (units of omega0); exclusive with --gammaF
    #[arg(
        long = "omegaF",
        value_name = "FREQ",
        allow_negative_numbers = true,
        conflicts_with = "gamma_f"
    )]
    omega_f: Option<f64>,
    /// Target scaling factor gammaF = [omega0/omegaF]^(1/2) (dimensionless)
    #[arg(long = "gammaF", value_name = "RATIO", allow_negative_numbers = true)]
    gamma_f: Option<f64>,
    /// Expansion duration tF (units of 1/omega0)
    #[arg(long = "tF", value_name = "TIME", allow_negative_numbers = true)]
    t_final: Option<f64>,
    /// Protocol sample count (dimensionless)
    #[arg(long, value_name = "COUNT")]
    samples: Option<usize>,
    /// Spatial dimension D entering the TF drive and coupling law (1 to 3)
    #[arg(long, value_name = "D")]
    dim: Option<u32>,
    /// Interaction homogeneity exponent alpha (dimensionless; 2 = contact)
    #[arg(long, value_name = "EXP", allow_negative_numbers = true)]
    alpha: Option<f64>,
}

/// Spatial grid and time-stepping parameters.
#[derive(Args, Debug)]
struct GridArgs {
    /// Grid size (points; power of two, at least 16)
    #[arg(long = "grid-points", value_name = "N")]
    grid_points: Option<usize>,
    /// Simulation box length (oscillator lengths of omega0)
    #[arg(long = "box-length", value_name = "LEN", allow_negative_numbers = true)]
    box_length: Option<f64>,
    /// Time step (units of 1/omega0)
    #[arg(long, value_name = "TIME", allow_negative_numbers = true)]
    dt: Option<f64>,
    /// Steps between observable probes (0 = about 200 probes per run)
    #[arg(long = "output-stride", value_name = "STEPS")]
    output_stride: Option<usize>,
}

/// Output targeting shared by every subcommand.
#[derive(Args, Debug)]
struct OutputArgs {
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default runs/<command>)
    #[arg(long = "seed-dir", value_name = "DIR")]
    seed_dir: Option<PathBuf>,
    /// Allow writing into a non-empty output directory
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct DesignArgs {
    #[command(flatten)]
    ramp: RampArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    ramp: RampArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Interaction regime: linear, gpe, or gpe_tf
    #[arg(long, value_name = "REGIME")]
    regime: Option<String>,
    /// Trap drive: cd (counter-diabatic) or bare (reference ramp)
    #[arg(long, value_name = "DRIVE")]
    drive: Option<String>,
    /// Bare coupling g0 (units of hbar omega0 x oscillator length)
    #[arg(long, value_name = "G", allow_negative_numbers = true)]
    g0: Option<f64>,
    /// Also write initial and final wavefunction snapshots
    #[arg(long)]
    snapshots: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct Figure1Args {
    /// Initial trap frequency (sets the frequency unit; hbar = m = 1)
    #[arg(long = "omega0", value_name = "FREQ", allow_negative_numbers = true)]
    omega0: Option<f64>,
    /// Final trap frequency (units of omega0); exclusive with --gammaF
    #[arg(
        long = "omegaF",
        value_name = "FREQ",
        allow_negative_numbers = true,
        conflicts_with = "gamma_f"
    )]
    omega_f: Option<f64>,
    /// Target scaling factor gammaF (dimensionless)
    #[arg(long = "gammaF", value_name = "RATIO", allow_negative_numbers = true)]
    gamma_f: Option<f64>,
    /// Curve duration (units of 1/omega0); repeat for several curves
    #[arg(
        long = "tF",
        value_name = "TIME",
        allow_negative_numbers = true,
        action = clap::ArgAction::Append
    )]
    t_final: Vec<f64>,
    /// Samples per curve (dimensionless)
    #[arg(long, value_name = "COUNT")]
    samples: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Final trap frequency (units of omega0 = 1); exclusive with --gammaF
    #[arg(
        long = "omegaF",
        value_name = "FREQ",
        allow_negative_numbers = true,
        conflicts_with = "gamma_f"
    )]
    omega_f: Option<f64>,
    /// Target scaling factor gammaF (dimensionless)
    #[arg(long = "gammaF", value_name = "RATIO", allow_negative_numbers = true)]
    gamma_f: Option<f64>,
    /// Sweep duration (units of 1/omega0); repeat for several rows
    #[arg(
        long = "tF",
        value_name = "TIME",
        allow_negative_numbers = true,
        action = clap::ArgAction::Append
    )]
    t_final: Vec<f64>,
    /// Protocol sample count per run (dimensionless)
    #[arg(long, value_name = "COUNT")]
    samples: Option<usize>,
    /// Spatial dimension D (1 to 3)
    #[arg(long, value_name = "D")]
    dim: Option<u32>,
    /// Interaction homogeneity exponent alpha (dimensionless)
    #[arg(long, value_name = "EXP", allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Interaction regime: linear, gpe, or gpe_tf
    #[arg(long, value_name = "REGIME")]
    regime: Option<String>,
    /// Bare coupling g0 (units of hbar omega0 x oscillator length)
    #[arg(long, value_name = "G", allow_negative_numbers = true)]
    g0: Option<f64>,
    /// Concurrent sweep workers (count)
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PistonArgs {
    /// Trap exponent b >= 2, or "piston" for the hard-wall limit
    #[arg(long, value_name = "B")]
    b: Option<String>,
    /// Width ratio xi(tF)/xi(0) (dimensionless)
    #[arg(long, value_name = "RATIO", allow_negative_numbers = true)]
    expansion: Option<f64>,
    /// Expansion duration tF (units of 1/omega0)
    #[arg(long = "tF", value_name = "TIME", allow_negative_numbers = true)]
    t_final: Option<f64>,
    /// Initial trap width xi(0) (oscillator lengths of omega0)
    #[arg(long, value_name = "LEN", allow_negative_numbers = true)]
    xi0: Option<f64>,
    /// Trap amplitude A in U = A |q/xi|^b (units of hbar omega0)
    #[arg(long, value_name = "A", allow_negative_numbers = true)]
    amplitude: Option<f64>,
    /// Auxiliary-waveform sample count (dimensionless)
    #[arg(long, value_name = "COUNT")]
    samples: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Run the reduced suite (well under a minute)
    #[arg(long)]
    quick: bool,
    /// Output directory (default runs/validate)
    #[arg(long = "seed-dir", value_name = "DIR")]
    seed_dir: Option<PathBuf>,
    /// Allow writing into a non-empty output directory
    #[arg(long)]
    force: bool,
}

pub(crate) fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::InvalidParameter(_)
        | Error::Domain(_)
        | Error::GridMismatch(_)
        | Error::Resolution(_)
        | Error::Overwrite(_) => 2,
        Error::Instability(_) | Error::Convergence { .. } | Error::Support(_) => 3,
        Error::Io(_) => 4,
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Design(args) => commands::design(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Figure1(args) => commands::figure1(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Piston(args) => commands::piston(&args),
        Command::Validate(args) => commands::validate(&args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(error) => {
            eprintln!("error: {error}");
            std::process::exit(exit_code_for(&error));
        }
    }
}
