//! Command-line front end of the `actuator` binary.
//!
//! Exit codes: 0 success, 1 a verification check failed (the report is still
//! written), 2 invalid input, 3 internal invariant violation. Errors are
//! written to the report destination as `{"error": {"kind", "message"}}`.

pub mod commands;
pub mod problem;
pub mod report;

use std::io::{Read, Write};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use commands::{CommandOutput, Format};
pub use problem::{Mode, Problem, ProblemFile, Tolerances};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "actuator",
    version,
    about = "Worst-case optimal actuator design for symmetric unstable systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form optimum: phi, v*, and the optimal (state, actuator) pairs.
    Solve(SolveArgs),
    /// Closed form plus multi-start ascent, sign checks and an energy simulation.
    Verify(VerifyArgs),
    /// Grid of xi(b) over the circle (n = 2) or sphere (n = 3).
    Sweep(SweepArgs),
    /// Simulate the minimum-energy steering input.
    Energy(EnergyArgs),
    /// Single gradient ascent with its trace.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Problem file (JSON); `-` reads standard input.
    #[arg(long, short)]
    pub input: String,
    /// Report destination; `-` writes to standard output.
    #[arg(long, short, default_value = "-")]
    pub output: String,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Arithmetic for the closed form; chosen automatically when omitted.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Add wall-clock time to JSON reports (they are then no longer reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gradient-norm stopping tolerance of the ascent.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Simulation horizon (default 40/lambda_1).
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid resolution N (default 10000 for n = 2, 100 for n = 3).
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Simulation horizon (default 40/lambda_1).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Actuator, comma separated (normalized; default v*).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub actuator: Option<Vec<f64>>,
    /// Initial state, comma separated (normalized; default the worst case for the actuator).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Starting actuator, comma separated (normalized; default random from the seed).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub start: Option<Vec<f64>>,
    /// Gradient-norm stopping tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

enum Failure {
    Input { kind: &'static str, message: String },
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Input { .. } => EXIT_INVALID_INPUT,
            Failure::Library(e) if e.is_validation() => EXIT_INVALID_INPUT,
            Failure::Library(_) => EXIT_INTERNAL,
        }
    }

    fn kind(&self) -> &str {
        match self {
            Failure::Input { kind, .. } => kind,
            Failure::Library(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input { message, .. } => message.clone(),
            Failure::Library(e) => e.to_string(),
        }
    }
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Solve(a) => &a.common,
            Command::Verify(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Energy(a) => &a.common,
            Command::Optimize(a) => &a.common,
        }
    }
}

/// Runs one command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let common = cli.command.common();
    let started = common.timing.then(Instant::now);
    let (text, code) = match run(&cli.command, started) {
        Ok(out) => {
            let code = if out.passed {
                EXIT_OK
            } else {
                EXIT_VERIFICATION_FAILED
            };
            (out.text, code)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            (
                report::error_json(failure.kind(), &failure.message()),
                failure.exit_code(),
            )
        }
    };
    match write_output(&common.output, &text) {
        Ok(()) => code,
        // The reader went away (`| head`); nothing left to report to.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => code,
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", common.output);
            EXIT_INTERNAL
        }
    }
}

fn run(command: &Command, started: Option<Instant>) -> Result<CommandOutput, Failure> {
    let common = command.common();
    let mut problem = load_problem(common)?;
    let format = |default| common.format.unwrap_or(default);
    let json_only = |name: &str| match common.format {
        Some(Format::Csv) => Err(Failure::Library(Error::InvalidConfig(format!(
            "{name} reports are JSON only"
        )))),
        _ => Ok(()),
    };
    let output = match command {
        Command::Solve(_) => {
            json_only("solve")?;
            commands::cmd_solve(&problem, started)?
        }
        Command::Verify(args) => {
            json_only("verify")?;
            set_gradient_tolerance(&mut problem, args.tolerance)?;
            let options = commands::VerifyOptions {
                restarts: args.restarts,
                seed: args.seed,
                horizon: args.horizon,
            };
            commands::cmd_verify(&problem, &options, started)?
        }
        Command::Sweep(args) => {
            commands::cmd_sweep(&problem, args.resolution, format(Format::Csv), started)?
        }
        Command::Energy(args) => {
            let options = commands::EnergyOptions {
                horizon: args.horizon,
                actuator: args.actuator.clone(),
                x0: args.x0.clone(),
            };
            commands::cmd_energy(&problem, &options, format(Format::Csv), started)?
        }
        Command::Optimize(args) => {
            set_gradient_tolerance(&mut problem, args.tolerance)?;
            let options = commands::OptimizeOptions {
                seed: args.seed,
                start: args.start.clone(),
            };
            commands::cmd_optimize(&problem, &options, format(Format::Json), started)?
        }
    };
    Ok(output)
}

fn set_gradient_tolerance(problem: &mut Problem, tolerance: Option<f64>) -> Result<(), Failure> {
    if let Some(t) = tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(
                Error::InvalidConfig(format!("tolerance must be positive, got {t}")).into(),
            );
        }
        problem.tolerances.gradient = t;
    }
    Ok(())
}

fn load_problem(common: &CommonArgs) -> Result<Problem, Failure> {
    let text = read_input(&common.input).map_err(|e| Failure::Input {
        kind: "Io",
        message: format!("cannot read {}: {e}", common.input),
    })?;
    let file = ProblemFile::from_json(&text).map_err(|e| Failure::Input {
        kind: "InvalidProblem",
        message: format!("malformed problem file: {e}"),
    })?;
    Ok(Problem::load(file, common.mode)?)
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path)
    }
}

fn write_output(path: &str, text: &str) -> std::io::Result<()> {
    if path == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        stdout.flush()
    } else {
        std::fs::write(path, text)
    }
}
