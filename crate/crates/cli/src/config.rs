//! Run configuration: command-line flags layered over an optional JSON file.
//!
//! Precedence, lowest first: built-in defaults, `--config` file, flags,
//! `SCHLICHT_SEED` (seed only).

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use schlicht::classes::ClassSpec;
use schlicht::harness::Target;
use schlicht::{kernels, NormalizedFunction};

use crate::CliError;

pub const SEED_ENV: &str = "SCHLICHT_SEED";
const DEFAULT_N: u64 = 1000;
const DEFAULT_BUDGET: u64 = 1000;
const DEFAULT_STEPS: usize = 20;

#[derive(Parser, Debug)]
#[command(name = "schlicht", version, about = "Coefficient bounds for convolution-defined bi-univalent classes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate the coefficient bounds for a class.
    Bounds,
    /// Check series reversion against the closed-form inverse coefficients.
    VerifyInverse,
    /// Randomized regression of the coefficient identities.
    Identities,
    /// Sample the class and grade accepted samples against the bounds.
    Sample,
    /// Hill-climb toward the bound over accepted samples.
    Search,
    /// Summarize and re-grade a stored JSON-lines batch.
    Report,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelName {
    /// z/(1-z)^2, k_n = n
    Koebe,
    /// z/(1-z), k_n = 1
    Halfplane,
    /// -log(1-z), k_n = 1/n
    Log,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetName {
    A2,
    A3,
    Combo,
}

impl From<TargetName> for Target {
    fn from(t: TargetName) -> Self {
        match t {
            TargetName::A2 => Target::A2,
            TargetName::A3 => Target::A3,
            TargetName::Combo => Target::Combo,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// Class parameter m >= 2.
    #[arg(long, global = true)]
    pub m: Option<f64>,
    /// Order parameter 0 <= beta < 1.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Complex alpha such as `1`, `0.5+0.5i`; selects the alpha-operator class.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub kernel: Option<KernelName>,
    /// Explicit kernel coefficients `k2,k3,...` (complex allowed).
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "kernel")]
    pub kernel_coeffs: Option<Vec<String>>,
    /// Number of trials.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Master seed; SCHLICHT_SEED takes precedence.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Search evaluations.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub target: Option<TargetName>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Artifact path (JSON lines for sample/search, CSV for bounds --table).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV summary path for sample.
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    /// JSON-lines batch to read (report).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Sweep beta over a grid (bounds).
    #[arg(long, global = true)]
    pub table: bool,
    /// Grid points for --table.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Machine-readable JSON output
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// CSV output
    #[arg(long, global = true)]
    pub csv: bool,
    /// JSON file with any of the above keys (snake_case) plus `command`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// A number or a string such as `"0.5+0.5i"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    fn into_text(self) -> String {
        match self {
            Scalar::Num(x) => x.to_string(),
            Scalar::Text(s) => s,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    m: Option<f64>,
    beta: Option<f64>,
    alpha: Option<Scalar>,
    kernel: Option<KernelName>,
    kernel_coeffs: Option<Vec<Scalar>>,
    n: Option<u64>,
    seed: Option<u64>,
    budget: Option<u64>,
    target: Option<TargetName>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    summary: Option<PathBuf>,
    input: Option<PathBuf>,
    table: Option<bool>,
    steps: Option<usize>,
    format: Option<Format>,
}

/// Fully resolved, validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub m: f64,
    pub beta: f64,
    pub alpha: Option<Complex64>,
    pub kernel: NormalizedFunction,
    pub kernel_label: String,
    pub n: u64,
    pub seed: u64,
    pub budget: u64,
    pub target: Target,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub table: bool,
    pub steps: usize,
    pub format: Format,
}

impl RunConfig {
    pub fn resolve(cli: Cli, env_seed: Option<String>) -> Result<Self, CliError> {
        let file = match &cli.flags.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let f = cli.flags;
        let command = cli
            .command
            .or(file.command)
            .ok_or_else(|| CliError::Usage("no command given (try --help)".into()))?;

        let alpha = f
            .alpha
            .or(file.alpha.map(Scalar::into_text))
            .map(|s| parse_complex(&s))
            .transpose()?;
        // Flags replace the file's kernel choice as a whole.
        let (name, coeffs) = if f.kernel.is_some() || f.kernel_coeffs.is_some() {
            (f.kernel, f.kernel_coeffs)
        } else {
            if file.kernel.is_some() && file.kernel_coeffs.is_some() {
                return Err(CliError::Usage(
                    "config sets both kernel and kernel_coeffs".into(),
                ));
            }
            let coeffs = file
                .kernel_coeffs
                .map(|v| v.into_iter().map(Scalar::into_text).collect());
            (file.kernel, coeffs)
        };
        let (kernel, kernel_label) = match (name, coeffs) {
            (_, Some(list)) => (custom_kernel(&list)?, "custom".to_owned()),
            (name, None) => {
                let name = name.unwrap_or(KernelName::Koebe);
                (builtin_kernel(name), format!("{name:?}").to_lowercase())
            }
        };

        let seed = match env_seed {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?,
            None => f.seed.or(file.seed).unwrap_or(0),
        };
        let format = if f.json {
            Format::Json
        } else if f.csv {
            Format::Csv
        } else {
            file.format.unwrap_or_default()
        };
        let config = Self {
            command,
            m: f.m.or(file.m).unwrap_or(2.0),
            beta: f.beta.or(file.beta).unwrap_or(0.0),
            alpha,
            kernel,
            kernel_label,
            n: f.n.or(file.n).unwrap_or(DEFAULT_N),
            seed,
            budget: f.budget.or(file.budget).unwrap_or(DEFAULT_BUDGET),
            target: f.target.or(file.target).unwrap_or(TargetName::A2).into(),
            jobs: f.jobs.or(file.jobs),
            out: f.out.or(file.out),
            summary: f.summary.or(file.summary),
            input: f.input.or(file.input),
            table: f.table || file.table.unwrap_or(false),
            steps: f.steps.or(file.steps).unwrap_or(DEFAULT_STEPS),
            format,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(CliError::Usage("--steps must be at least 1".into()));
        }
        if self.command == Command::Search && self.budget == 0 {
            return Err(CliError::Usage("--budget must be at least 1".into()));
        }
        if self.command == Command::Report && self.input.is_none() {
            return Err(CliError::Usage("report needs --input".into()));
        }
        if matches!(self.command, Command::Bounds | Command::Sample | Command::Search) {
            self.spec()?;
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ClassSpec, CliError> {
        Ok(ClassSpec::new(self.m, self.beta, self.alpha, self.kernel.clone())?)
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let z = Complex64::from_str(s.trim())
        .map_err(|_| CliError::Usage(format!("cannot parse {s:?} as a complex number")))?;
    if !z.is_finite() {
        return Err(CliError::Usage(format!("{s:?} is not finite")));
    }
    Ok(z)
}

fn builtin_kernel(name: KernelName) -> NormalizedFunction {
    match name {
        KernelName::Koebe => kernels::koebe(kernels::KERNEL_ORDER),
        KernelName::Halfplane => kernels::halfplane(kernels::KERNEL_ORDER),
        KernelName::Log => kernels::log(kernels::KERNEL_ORDER),
    }
}

/// `z + k_2 z^2 + ... + k_N z^N`; coefficients past `k_N` are unknown, so
/// series built from this kernel are truncated at order `N`.
fn custom_kernel(list: &[String]) -> Result<NormalizedFunction, CliError> {
    if list.len() < 2 {
        return Err(CliError::Usage("kernel coefficients need at least k2 and k3".into()));
    }
    let tail = list
        .iter()
        .map(|s| parse_complex(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NormalizedFunction::from_tail(&tail)?)
}
