//! Run configuration from command-line flags and an optional config file.
//!
//! The config file is flat TOML. Every key is optional and flags override
//! file values:
//!
//! ```toml
//! command = "sweep"          # fringe | sweep | oracle-check | tomography | qkd | fit
//! variant = "a"              # a | b | c | d
//! beta = "22.5deg"           # or a number in radians
//! beta_points = 25
//! phases = 64
//! mean_total = 10000
//! seed = 42
//! samples = 200              # oracle-check spec count
//! upper = "crystal(0deg, 310); crystal(45deg, 150)"
//! lower = "crystal(45deg, 150); crystal(0deg, 310)"
//! u1 = "crystal(60deg, 310)" # qkd segments u1..u4
//! input = "counts.csv"       # fit: file with phi,counts columns
//! output = "out.csv"
//! ```

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use mzi_core::experiments::Fig4Variant;
use mzi_core::optics::{ArmElement, ArmSpec};
use serde::Deserialize;

use crate::arms::{parse_angle, parse_elements};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Fringe,
    Sweep,
    OracleCheck,
    Tomography,
    Qkd,
    Fit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fringe => "fringe",
            Command::Sweep => "sweep",
            Command::OracleCheck => "oracle-check",
            Command::Tomography => "tomography",
            Command::Qkd => "qkd",
            Command::Fit => "fit",
        }
    }
}

/// Mach-Zehnder interference of quantum channels: fringes, sweeps, oracle
/// checks, tomography and QKD visibility.
#[derive(Debug, Parser)]
#[command(name = "mzi", version)]
pub struct Flags {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Flat TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reference configuration a, b, c or d.
    #[arg(long)]
    pub variant: Option<String>,
    /// Angle β, radians or with a deg/rad suffix.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub beta_points: Option<usize>,
    #[arg(long)]
    pub phases: Option<usize>,
    #[arg(long)]
    pub mean_total: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random specs for oracle-check.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub upper: Option<String>,
    #[arg(long)]
    pub lower: Option<String>,
    #[arg(long)]
    pub u1: Option<String>,
    #[arg(long)]
    pub u2: Option<String>,
    #[arg(long)]
    pub u3: Option<String>,
    #[arg(long)]
    pub u4: Option<String>,
    /// Counts file for fit (columns phi and counts).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output CSV path; defaults to <command>.csv.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AngleValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    variant: Option<String>,
    beta: Option<AngleValue>,
    beta_points: Option<usize>,
    phases: Option<usize>,
    mean_total: Option<u64>,
    seed: Option<u64>,
    samples: Option<usize>,
    upper: Option<String>,
    lower: Option<String>,
    u1: Option<String>,
    u2: Option<String>,
    u3: Option<String>,
    u4: Option<String>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub variant: Option<Fig4Variant>,
    /// Radians.
    pub beta: Option<f64>,
    pub beta_points: Option<usize>,
    pub phases: Option<usize>,
    pub mean_total: Option<u64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub arms: Option<(ArmSpec, ArmSpec)>,
    pub segments: Option<[Vec<ArmElement>; 4]>,
    pub input_path: Option<PathBuf>,
    pub output_path: PathBuf,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_file_config(&text)
}

fn parse_file_config(text: &str) -> Result<FileConfig, CliError> {
    toml::from_str(text).map_err(|e| usage(format!("config file: {}", e.message())))
}

/// Parses command-line arguments (including the program name) into a
/// validated configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = Flags::try_parse_from(args).map_err(CliError::Clap)?;
    let file = match &flags.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };
    merge(flags, file)
}

/// Parses a config document on its own, with no flags.
pub fn parse_config_text(text: &str) -> Result<RunConfig, CliError> {
    let flags = Flags::try_parse_from(["mzi"]).map_err(CliError::Clap)?;
    merge(flags, parse_file_config(text)?)
}

fn merge(flags: Flags, file: FileConfig) -> Result<RunConfig, CliError> {
    let command = flags
        .command
        .or(file.command)
        .ok_or_else(|| usage("missing command (fringe, sweep, oracle-check, tomography, qkd, fit)"))?;

    let variant = flags
        .variant
        .or(file.variant)
        .map(|v| v.parse::<Fig4Variant>().map_err(|e| usage(format!("variant: {e}"))))
        .transpose()?;

    let beta = match (flags.beta, file.beta) {
        (Some(text), _) | (None, Some(AngleValue::Text(text))) => {
            Some(parse_angle(&text).map_err(|e| usage(format!("beta: {e}")))?)
        }
        (None, Some(AngleValue::Number(x))) if x.is_finite() => Some(x),
        (None, Some(AngleValue::Number(_))) => return Err(usage("beta: angle must be finite")),
        (None, None) => None,
    };

    let arm_text = |key: &str, flag: Option<String>, file: Option<String>| {
        flag.or(file)
            .map(|t| parse_elements(&t).map_err(|e| usage(format!("{key}: {e}"))))
            .transpose()
    };
    let upper = arm_text("upper", flags.upper, file.upper)?;
    let lower = arm_text("lower", flags.lower, file.lower)?;
    let arms = match (upper, lower) {
        (None, None) => None,
        (u, l) => Some((ArmSpec::new(u.unwrap_or_default()), ArmSpec::new(l.unwrap_or_default()))),
    };
    let segs = [
        arm_text("u1", flags.u1, file.u1)?,
        arm_text("u2", flags.u2, file.u2)?,
        arm_text("u3", flags.u3, file.u3)?,
        arm_text("u4", flags.u4, file.u4)?,
    ];
    let segments = if segs.iter().all(Option::is_none) {
        None
    } else {
        Some(segs.map(Option::unwrap_or_default))
    };

    let config = RunConfig {
        command,
        variant,
        beta,
        beta_points: flags.beta_points.or(file.beta_points),
        phases: flags.phases.or(file.phases),
        mean_total: flags.mean_total.or(file.mean_total),
        seed: flags.seed.or(file.seed),
        samples: flags.samples.or(file.samples),
        arms,
        segments,
        input_path: flags.input.or(file.input),
        output_path: flags
            .output
            .or(file.output)
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name()))),
    };
    validate(&config)?;
    Ok(config)
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    if c.variant.is_some() && c.arms.is_some() {
        return Err(usage("variant and upper/lower arms are mutually exclusive"));
    }
    if c.beta_points == Some(0) {
        return Err(usage("beta_points must be at least 1"));
    }
    if c.mean_total == Some(0) {
        return Err(usage("mean_total must be at least 1"));
    }
    if matches!(c.phases, Some(p) if p < 4) {
        return Err(usage("phases must be at least 4"));
    }
    match c.command {
        Command::Sweep => {
            if c.variant.is_none() {
                return Err(usage("sweep requires variant"));
            }
        }
        Command::Fringe => {
            if c.variant.is_none() && c.arms.is_none() {
                return Err(usage("fringe requires variant or upper/lower arms"));
            }
            if c.variant.is_some() && c.beta.is_none() {
                return Err(usage("fringe with a variant requires beta"));
            }
        }
        Command::Tomography => {
            if c.beta.is_none() && c.beta_points.is_none() {
                return Err(usage("tomography requires beta or beta_points"));
            }
        }
        Command::Qkd => {
            if c.segments.is_some() && c.variant.is_some() {
                return Err(usage("qkd takes either segments u1..u4 or variant, not both"));
            }
            if c.variant.is_some() && c.beta.is_none() {
                return Err(usage("qkd with a variant requires beta"));
            }
        }
        Command::Fit => {
            let inline = c.variant.is_some() || c.arms.is_some();
            if c.input_path.is_none() && !inline {
                return Err(usage(
                    "fit requires input (counts file) or inline sampling parameters (variant/arms)",
                ));
            }
            if c.input_path.is_some() && inline {
                return Err(usage("fit takes either input or inline sampling parameters, not both"));
            }
            if c.variant.is_some() && c.beta.is_none() {
                return Err(usage("fit with a variant requires beta"));
            }
        }
        Command::OracleCheck => {}
    }
    Ok(())
}
