//! Command-line front end driven by JSON scenario files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation error (a JSON object
//! naming the offending field goes to stderr), 3 numerical failure, 64 usage.

mod commands;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use scenario::{Scenario, ValidationError};

use crate::error::Error;
use crate::flows::{write_trajectory_csv, CsvColumns, Trajectory};
use crate::structures::matrix_to_rows;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "hyperflow", version, about = "Quaternionic oscillators and their symmetries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the quaternionic relations and orientations of the structure
    Verify(Options),
    /// Rotate each block to its standard triple
    Reduce(Options),
    /// Closed-form oscillator or Dirac trajectories
    Flow(Options),
    /// RK4 trajectories of a hyperhamiltonian, oscillator or damped field
    Simulate(Options),
    /// Drift of the conserved quantities along closed-form trajectories
    Invariants(Options),
    /// Linear symmetry algebra at fixed block radii
    Symmetry(Options),
    /// Test whether a field is a quaternionic oscillator
    Detect(Options),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Args)]
pub struct Options {
    /// Scenario file (JSON)
    #[arg(long)]
    pub scenario: PathBuf,
    /// Directory for output files; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trajectory output format
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Overrides time.dt
    #[arg(long)]
    pub dt: Option<f64>,
    /// Overrides time.t_end
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Overrides the command's tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for random sample points
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(ValidationError),
    Run(Error),
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        CliError::Validation(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Run(Error::Io(_)) => EXIT_IO,
            CliError::Run(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Run(_) => EXIT_VALIDATION,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Validation(v) => json!({
                "error": "validation",
                "field": v.field,
                "message": v.message,
            }),
            CliError::Run(e) => json!({
                "error": if e.is_numerical() { "numerical" } else { "invalid" },
                "message": e.to_string(),
            }),
        }
    }
}

/// What a command produced.
pub(crate) enum Output {
    Report(serde_json::Value),
    Trajectories(Vec<(Trajectory, CsvColumns)>),
}

pub(crate) struct Outcome {
    pub outputs: Vec<(String, Output)>,
    pub code: i32,
}

impl Outcome {
    fn single(name: &str, output: Output) -> Self {
        Self {
            outputs: vec![(name.to_string(), output)],
            code: EXIT_OK,
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let (name, opts) = match &cli.command {
        Command::Verify(o) => ("verify", o),
        Command::Reduce(o) => ("reduce", o),
        Command::Flow(o) => ("flow", o),
        Command::Simulate(o) => ("simulate", o),
        Command::Invariants(o) => ("invariants", o),
        Command::Symmetry(o) => ("symmetry", o),
        Command::Detect(o) => ("detect", o),
    };
    log::info!("{name}: scenario {}", opts.scenario.display());
    let result = Scenario::load(&opts.scenario)
        .map_err(CliError::from)
        .and_then(|sc| match name {
            "verify" => commands::verify(&sc, opts),
            "reduce" => commands::reduce(&sc, opts),
            "flow" => commands::flow(&sc, opts),
            "simulate" => commands::simulate(&sc, opts),
            "invariants" => commands::invariants(&sc, opts),
            "symmetry" => commands::symmetry(&sc, opts),
            _ => commands::detect(&sc, opts),
        })
        .and_then(|outcome| {
            emit(name, &outcome, opts, stdout)?;
            Ok(outcome.code)
        });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Entry point for the binary: real process arguments and streams, logging
/// configured from `HYPERFLOW_LOG`.
pub fn main_exit_code() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("HYPERFLOW_LOG", "warn"))
        .try_init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(command: &str, outcome: &Outcome, opts: &Options, stdout: &mut dyn Write) -> Result<(), CliError> {
    if let Some(dir) = &opts.out {
        std::fs::create_dir_all(dir)?;
    }
    for (name, output) in &outcome.outputs {
        match output {
            Output::Report(value) => {
                let text = serde_json::to_string_pretty(value).expect("reports serialize");
                write_text(opts.out.as_deref(), &format!("{name}.json"), &text, stdout)?;
            }
            Output::Trajectories(trajs) => match opts.format {
                Format::Json => {
                    let value = trajectories_json(trajs);
                    let text = serde_json::to_string_pretty(&value).expect("trajectories serialize");
                    write_text(opts.out.as_deref(), &format!("{name}.json"), &text, stdout)?;
                }
                Format::Csv => {
                    for (i, (traj, cols)) in trajs.iter().enumerate() {
                        let mut buf = Vec::new();
                        write_trajectory_csv(&mut buf, traj, cols)?;
                        let text = String::from_utf8(buf).expect("csv is utf-8");
                        if opts.out.is_none() && i > 0 {
                            writeln!(stdout)?;
                        }
                        write_text(opts.out.as_deref(), &format!("{name}_{i}.csv"), &text, stdout)?;
                    }
                }
            },
        }
    }
    log::info!("{command}: done");
    Ok(())
}

fn write_text(dir: Option<&Path>, file: &str, text: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match dir {
        Some(d) => {
            let mut t = text.to_string();
            if !t.ends_with('\n') {
                t.push('\n');
            }
            std::fs::write(d.join(file), t)
        }
        None => {
            write!(stdout, "{text}")?;
            if !text.ends_with('\n') {
                writeln!(stdout)?;
            }
            Ok(())
        }
    }
}

fn trajectories_json(trajs: &[(Trajectory, CsvColumns)]) -> serde_json::Value {
    let items: Vec<_> = trajs
        .iter()
        .enumerate()
        .map(|(i, (t, _))| {
            let states: Vec<Vec<f64>> = t.states().iter().map(|s| s.iter().copied().collect()).collect();
            json!({
                "index": i,
                "method": t.method(),
                "step": t.step(),
                "times": t.times(),
                "states": states,
            })
        })
        .collect();
    json!({ "trajectories": items })
}

pub(crate) fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    matrix_to_rows(m)
}
