//! Flat key=value experiment configuration with command-line overrides.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use accelode::{DampingSchedule, Objective};

use crate::CliError;

/// Fully resolved phase-portrait experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub schedule: ScheduleSpec,
    pub step_sizes: Vec<f64>,
    pub q_min: f64,
    pub q_max: f64,
    pub q_step: f64,
    pub p0: f64,
    pub steps: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    /// Defaults reproduce the step-size study: the piecewise objective with
    /// condition number 5, starts (q0, 0) for q0 in -2:0.2:5, four step
    /// sizes.
    fn default() -> Self {
        Self {
            objective: ObjectiveSpec::Piecewise { kappa: 5.0 },
            schedule: ScheduleSpec::StronglyConvex { kappa: None },
            step_sizes: vec![0.1, 0.5, 1.0, 1.2],
            q_min: -2.0,
            q_max: 5.0,
            q_step: 0.2,
            p0: 0.0,
            steps: 500,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.q_min < self.q_max) {
            return Err(CliError::usage("q_min must be below q_max"));
        }
        if !(self.q_step > 0.0) {
            return Err(CliError::usage("q_step must be positive"));
        }
        if self.steps == 0 {
            return Err(CliError::usage("steps must be at least 1"));
        }
        if self.step_sizes.is_empty() || self.step_sizes.iter().any(|&t| !(t > 0.0)) {
            return Err(CliError::usage("step sizes must be positive"));
        }
        Ok(())
    }

    /// Start positions `q_min, q_min + q_step, ..` up to and including
    /// `q_max`.
    pub fn initial_grid(&self) -> Vec<f64> {
        let count = ((self.q_max - self.q_min) / self.q_step).round() as usize;
        (0..=count).map(|i| self.q_min + self.q_step * i as f64).collect()
    }
}

/// Objective selected by name plus parameters.
#[derive(Debug, Clone)]
pub enum ObjectiveSpec {
    Quadratic { diag: Vec<f64> },
    Piecewise { kappa: f64 },
}

impl ObjectiveSpec {
    /// Parses `quadratic:5,1` or `piecewise:5`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (spec.trim(), ""),
        };
        match name {
            "quadratic" => {
                let diag = parse_f64_list(params)
                    .map_err(|e| CliError::usage(format!("quadratic diagonal: {e}")))?;
                if diag.is_empty() {
                    return Err(CliError::usage("quadratic needs diagonal entries, e.g. quadratic:5,1"));
                }
                Ok(Self::Quadratic { diag })
            }
            "piecewise" => {
                let kappa: f64 = if params.is_empty() {
                    5.0
                } else {
                    params
                        .parse()
                        .map_err(|e| CliError::usage(format!("piecewise kappa: {e}")))?
                };
                Ok(Self::Piecewise { kappa })
            }
            other => Err(CliError::usage(format!(
                "unknown objective '{other}' (expected quadratic:<diag> or piecewise:<kappa>)"
            ))),
        }
    }

    pub fn build(&self) -> Result<Objective, CliError> {
        match self {
            Self::Quadratic { diag } => Objective::quadratic(diag).map_err(CliError::from),
            Self::Piecewise { kappa } => Objective::piecewise(*kappa).map_err(CliError::from),
        }
    }
}

/// Schedule mode; the strongly convex mode borrows the objective's condition
/// number unless one is given explicitly.
#[derive(Debug, Clone, Copy)]
pub enum ScheduleSpec {
    StronglyConvex { kappa: Option<f64> },
    NonStronglyConvex,
    Undamped,
}

impl ScheduleSpec {
    pub fn parse(spec: &str, kappa_flag: Option<f64>) -> Result<Self, CliError> {
        match spec.trim() {
            "sc" | "strongly-convex" => Ok(Self::StronglyConvex { kappa: kappa_flag }),
            "nsc" | "non-strongly-convex" => Ok(Self::NonStronglyConvex),
            "undamped" => Ok(Self::Undamped),
            other => Err(CliError::usage(format!(
                "unknown schedule '{other}' (expected sc, nsc, or undamped)"
            ))),
        }
    }

    pub fn build(&self, obj: &Objective) -> Result<DampingSchedule, CliError> {
        match self {
            Self::StronglyConvex { kappa } => {
                let k = kappa.unwrap_or_else(|| obj.kappa());
                DampingSchedule::strongly_convex(k).map_err(CliError::from)
            }
            Self::NonStronglyConvex => Ok(DampingSchedule::non_strongly_convex()),
            Self::Undamped => Ok(DampingSchedule::undamped()),
        }
    }
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect()
}

/// Reads a `key = value` file (one pair per line, `#` comments) and applies
/// the pairs onto `cfg`. Command-line flags are applied afterwards by the
/// caller, so they win.
pub fn apply_config_file(cfg: &mut ExperimentConfig, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
    let mut pairs = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!(
                "{}:{}: expected key = value, got '{raw}'",
                path.display(),
                lineno + 1
            ))
        })?;
        pairs.insert(key.trim().to_string(), value.trim().to_string());
    }
    let bad = |key: &str, e: String| CliError::usage(format!("config key {key}: {e}"));
    for (key, value) in pairs {
        match key.as_str() {
            "objective" => cfg.objective = ObjectiveSpec::parse(&value)?,
            "schedule" => {
                cfg.schedule = ScheduleSpec::parse(&value, schedule_kappa(&cfg.schedule))?
            }
            "kappa" => {
                let k = value.parse::<f64>().map_err(|e| bad("kappa", e.to_string()))?;
                if let ScheduleSpec::StronglyConvex { kappa } = &mut cfg.schedule {
                    *kappa = Some(k);
                }
            }
            "step_sizes" | "step_size" => {
                cfg.step_sizes = parse_f64_list(&value).map_err(|e| bad(&key, e))?
            }
            "q_min" => cfg.q_min = value.parse().map_err(|e: std::num::ParseFloatError| bad("q_min", e.to_string()))?,
            "q_max" => cfg.q_max = value.parse().map_err(|e: std::num::ParseFloatError| bad("q_max", e.to_string()))?,
            "q_step" => cfg.q_step = value.parse().map_err(|e: std::num::ParseFloatError| bad("q_step", e.to_string()))?,
            "p0" => cfg.p0 = value.parse().map_err(|e: std::num::ParseFloatError| bad("p0", e.to_string()))?,
            "steps" => cfg.steps = value.parse().map_err(|e: std::num::ParseIntError| bad("steps", e.to_string()))?,
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            other => return Err(CliError::usage(format!("unknown config key '{other}'"))),
        }
    }
    Ok(())
}

fn schedule_kappa(s: &ScheduleSpec) -> Option<f64> {
    match s {
        ScheduleSpec::StronglyConvex { kappa } => *kappa,
        _ => None,
    }
}
