//! `accelode`: damping constants, phase portraits, contour contraction
//! accounting, and verification suites for the discretized damped flow.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{ContourRun, ContourShape};
use config::{parse_f64_list, ExperimentConfig, ObjectiveSpec, ScheduleSpec};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Io(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }
    fn verification(msg: impl Into<String>) -> Self {
        Self::Verification(msg.into())
    }
    fn io(msg: impl Into<String>) -> Self {
        Self::Io(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Verification(_) => 1,
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Verification(m) | Self::Io(m) => m,
        }
    }
}

impl From<accelode::AccelError> for CliError {
    fn from(e: accelode::AccelError) -> Self {
        match e {
            accelode::AccelError::InvalidArgument(m) => Self::Usage(m),
            accelode::AccelError::Io(m) => Self::Io(m.to_string()),
            other => Self::Verification(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "accelode",
    version,
    about = "Numerical laboratory for the damped-oscillator view of accelerated gradient descent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the damping constants (2d, beta) across condition numbers
    Constants(ConstantsArgs),
    /// Simulate a grid of starts at several step sizes; emit CSV and SVG
    PhasePortrait(PhasePortraitArgs),
    /// Evolve a phase-plane contour and account for its area contraction
    Contour(ContourArgs),
    /// Run a verification suite and emit a JSON report
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ConstantsArgs {
    /// Comma-separated condition numbers, each >= 1
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    kappa: String,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhasePortraitArgs {
    /// key = value config file applied before the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// Objective, e.g. piecewise:5 or quadratic:5,1
    #[arg(long)]
    objective: Option<String>,
    /// Schedule: sc, nsc, or undamped
    #[arg(long)]
    schedule: Option<String>,
    /// Condition number for the sc schedule (defaults to the objective's)
    #[arg(long)]
    kappa: Option<f64>,
    /// Comma-separated step sizes
    #[arg(long, value_name = "LIST")]
    step_sizes: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    q_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q_max: Option<f64>,
    #[arg(long)]
    q_step: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p0: Option<f64>,
    /// Maximum steps per trajectory
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory (ACCELODE_OUT overrides)
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ContourArgs {
    /// Objective, e.g. piecewise:5 or quadratic:3
    #[arg(long, default_value = "piecewise:5")]
    objective: String,
    /// Schedule: sc, nsc, or undamped
    #[arg(long, default_value = "sc")]
    schedule: String,
    /// Condition number for the sc schedule (defaults to the objective's)
    #[arg(long)]
    kappa: Option<f64>,
    /// Initial shape: circle, levelset, or csv
    #[arg(long, default_value = "circle")]
    shape: String,
    /// Circle radius
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Circle center as q,p
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    center: String,
    /// Level-set energy
    #[arg(long, default_value_t = 1.0)]
    energy: f64,
    /// Contour CSV to import (shape = csv)
    #[arg(long)]
    from: Option<PathBuf>,
    /// Vertex count for generated shapes
    #[arg(long, default_value_t = 2048)]
    vertices: usize,
    #[arg(long, default_value_t = 0.5)]
    step_size: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory to dump the contour polygon after every step
    #[arg(long)]
    save_contours: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run
    #[arg(value_parser = ["continuous", "discrete", "equivalence", "geometry", "all"], default_value = "all")]
    suite: String,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    json: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Constants(args) => {
            let kappas = parse_f64_list(&args.kappa)
                .map_err(|e| CliError::usage(format!("--kappa: {e}")))?;
            if kappas.is_empty() {
                return Err(CliError::usage("--kappa needs at least one value"));
            }
            commands::cmd_constants(&kappas, args.out.as_deref())
        }
        Command::PhasePortrait(args) => {
            let mut cfg = ExperimentConfig::default();
            if let Some(path) = &args.config {
                config::apply_config_file(&mut cfg, path)?;
            }
            if let Some(spec) = &args.objective {
                cfg.objective = ObjectiveSpec::parse(spec)?;
            }
            if let Some(spec) = &args.schedule {
                cfg.schedule = ScheduleSpec::parse(spec, args.kappa)?;
            } else if let (Some(k), ScheduleSpec::StronglyConvex { kappa }) =
                (args.kappa, &mut cfg.schedule)
            {
                *kappa = Some(k);
            }
            if let Some(list) = &args.step_sizes {
                cfg.step_sizes =
                    parse_f64_list(list).map_err(|e| CliError::usage(format!("--step-sizes: {e}")))?;
            }
            if let Some(v) = args.q_min {
                cfg.q_min = v;
            }
            if let Some(v) = args.q_max {
                cfg.q_max = v;
            }
            if let Some(v) = args.q_step {
                cfg.q_step = v;
            }
            if let Some(v) = args.p0 {
                cfg.p0 = v;
            }
            if let Some(v) = args.steps {
                cfg.steps = v;
            }
            if let Some(dir) = args.out_dir {
                cfg.output_dir = dir;
            }
            if let Ok(dir) = std::env::var("ACCELODE_OUT") {
                cfg.output_dir = PathBuf::from(dir);
            }
            commands::cmd_phase_portrait(&cfg)
        }
        Command::Contour(args) => {
            let shape = match args.shape.as_str() {
                "circle" => {
                    let center = parse_f64_list(&args.center)
                        .map_err(|e| CliError::usage(format!("--center: {e}")))?;
                    if center.len() != 2 {
                        return Err(CliError::usage("--center needs exactly q,p"));
                    }
                    ContourShape::Circle {
                        center: [center[0], center[1]],
                        radius: args.radius,
                    }
                }
                "levelset" => ContourShape::LevelSet {
                    energy: args.energy,
                },
                "csv" => ContourShape::Csv {
                    path: args
                        .from
                        .clone()
                        .ok_or_else(|| CliError::usage("shape csv needs --from FILE"))?,
                },
                other => {
                    return Err(CliError::usage(format!(
                        "unknown shape '{other}' (expected circle, levelset, or csv)"
                    )))
                }
            };
            let run = ContourRun {
                objective: ObjectiveSpec::parse(&args.objective)?,
                schedule: ScheduleSpec::parse(&args.schedule, args.kappa)?,
                shape,
                vertices: args.vertices,
                step_size: args.step_size,
                steps: args.steps,
                out: args.out,
                save_contours: args.save_contours,
            };
            commands::cmd_contour(&run)
        }
        Command::Verify(args) => commands::cmd_verify(&args.suite, args.json.as_deref()),
    }
}

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors by itself.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
