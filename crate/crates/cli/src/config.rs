//! Flag parsing and config-file merging.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gurlab::{Constants, Objective};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "gurlab", version, about = "Verify uncertainty relations of entangled particles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Run every relation on the built-in state battery.
    Verify(Flags),
    /// Evaluate the suite over a one-parameter family grid.
    Sweep(Flags),
    /// Minimize an uncertainty product over a state family.
    Minimize(Flags),
    /// Summarize a verify, sweep or minimize output file.
    Report {
        input: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Gaussian,
    Grid,
    Both,
}

impl EngineChoice {
    pub fn gaussian(self) -> bool {
        matches!(self, EngineChoice::Gaussian | EngineChoice::Both)
    }

    pub fn grid(self) -> bool {
        matches!(self, EngineChoice::Grid | EngineChoice::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// ℏ as a number or the name `si`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum HbarArg {
    Value(f64),
    Name(String),
}

impl std::str::FromStr for HbarArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "si" {
            return Ok(HbarArg::Name(s.into()));
        }
        s.parse().map(HbarArg::Value).map_err(|_| format!("expected a number or 'si', got '{s}'"))
    }
}

impl HbarArg {
    fn resolve(&self) -> Result<Constants, String> {
        match self {
            HbarArg::Value(v) => Constants::new(*v).map_err(|e| e.to_string()),
            HbarArg::Name(n) if n == "si" => Ok(Constants::si()),
            HbarArg::Name(n) => Err(format!("hbar must be a number or 'si', got '{n}'")),
        }
    }
}

/// Either a `start:step:stop` range or an explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridArg {
    Spec(String),
    List(Vec<f64>),
}

impl std::str::FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(GridArg::Spec(s.to_string()))
    }
}

impl GridArg {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            GridArg::List(v) => check_grid(v.clone()),
            GridArg::Spec(s) => parse_grid(s),
        }
    }
}

fn check_grid(v: Vec<f64>) -> Result<Vec<f64>, String> {
    if v.is_empty() {
        return Err("grid is empty".into());
    }
    if !v.iter().all(|x| x.is_finite()) {
        return Err("grid values must be finite".into());
    }
    Ok(v)
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad grid value '{t}'"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => check_grid(s.split(',').map(num).collect::<Result<_, _>>()?),
        3 => {
            let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
                return Err(format!("range '{s}' needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(format!("range '{s}' has too many points"));
            }
            Ok((0..count).map(|k| start + step * k as f64).collect())
        }
        _ => Err(format!("grid '{s}' is neither start:step:stop nor a list")),
    }
}

/// Flags shared by every subcommand. The config file uses the same names
/// as keys.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// Engine selection.
    #[arg(long, value_enum)]
    pub engine: Option<EngineChoice>,
    /// Reduced Planck constant: a positive number or `si`.
    #[arg(long)]
    pub hbar: Option<HbarArg>,
    /// Slack tolerance override (also used for cross-engine agreement).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// two_mode_squeezed, correlated_triple, random_gaussian or
    /// grid_correlated_gaussian.
    #[arg(long)]
    pub family: Option<String>,
    /// `start:step:stop` or a comma-separated list.
    #[arg(long = "r-grid")]
    pub r_grid: Option<GridArg>,
    /// Objective evaluation budget for `minimize`.
    #[arg(long)]
    pub budget: Option<usize>,
    /// collective_product, sum_product_two, sum_product_three or
    /// individual_product.
    #[arg(long)]
    pub objective: Option<String>,
    /// Particle count for random_gaussian.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Squeezing range for random states.
    #[arg(long = "squeeze-max")]
    pub squeeze_max: Option<f64>,
    /// JSON file with any of the flags above; command-line flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Flags {
    fn overlay(self, base: Flags) -> Flags {
        Flags {
            engine: self.engine.or(base.engine),
            hbar: self.hbar.or(base.hbar),
            tol: self.tol.or(base.tol),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            family: self.family.or(base.family),
            r_grid: self.r_grid.or(base.r_grid),
            budget: self.budget.or(base.budget),
            objective: self.objective.or(base.objective),
            particles: self.particles.or(base.particles),
            squeeze_max: self.squeeze_max.or(base.squeeze_max),
            config: self.config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Sweep,
    Minimize,
    Report,
}

pub const DEFAULT_BUDGET: usize = 400;
pub const DEFAULT_SQUEEZE_MAX: f64 = 1.5;

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub engine: EngineChoice,
    pub constants: Constants,
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub family: Option<String>,
    pub r_grid: Option<Vec<f64>>,
    pub budget: usize,
    pub objective: Objective,
    pub particles: usize,
    pub squeeze_max: f64,
    pub input: Option<PathBuf>,
}

impl RunConfig {
    pub fn hbar(&self) -> f64 {
        self.constants.hbar()
    }

    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let (command, flags, input) = match cli.command {
            CommandArgs::Verify(f) => (Command::Verify, f, None),
            CommandArgs::Sweep(f) => (Command::Sweep, f, None),
            CommandArgs::Minimize(f) => (Command::Minimize, f, None),
            CommandArgs::Report { input, flags } => (Command::Report, flags, Some(input)),
        };
        let flags = match &flags.config {
            Some(path) => {
                let base = load_config(path)?;
                flags.overlay(base)
            }
            None => flags,
        };
        Self::resolve(command, flags, input)
    }

    fn resolve(command: Command, f: Flags, input: Option<PathBuf>) -> Result<Self, String> {
        let constants = f.hbar.map(|h| h.resolve()).transpose()?.unwrap_or_default();
        if let Some(t) = f.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(format!("--tol must be > 0, got {t}"));
            }
        }
        let budget = f.budget.unwrap_or(DEFAULT_BUDGET);
        let squeeze_max = f.squeeze_max.unwrap_or(DEFAULT_SQUEEZE_MAX);
        if !(squeeze_max.is_finite() && squeeze_max >= 0.0) {
            return Err(format!("--squeeze-max must be finite and >= 0, got {squeeze_max}"));
        }
        let objective = match &f.objective {
            Some(o) => o.parse().map_err(|e: gurlab::Error| e.to_string())?,
            None => Objective::IndividualProduct,
        };
        Ok(Self {
            command,
            engine: f.engine.unwrap_or(EngineChoice::Both),
            constants,
            tol: f.tol,
            seed: f.seed.unwrap_or(0),
            out: f.out,
            format: f.format.unwrap_or(Format::Json),
            family: f.family,
            r_grid: f.r_grid.map(|g| g.values()).transpose()?,
            budget,
            objective,
            particles: f.particles.unwrap_or(2),
            squeeze_max,
            input,
        })
    }
}

fn load_config(path: &Path) -> Result<Flags, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}
