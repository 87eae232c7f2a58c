//! Shared CLI configuration: errors, the flat key=value config file, and
//! model-flag resolution.
//!
//! Every value can come from three places, in order of precedence:
//! an explicit command-line flag, an entry in the `--config` file, or
//! the subcommand's default.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use tvlap::matrix::Matrix;
use tvlap::model::{GVariant, TvlapConfig};

/// CLI error with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problem (exit 2).
    Usage(String),
    /// Analytic failure while processing valid input (exit 1).
    Analytic(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analytic(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Analytic(m) => write!(f, "{m}"),
        }
    }
}

impl From<tvlap::Error> for CliError {
    fn from(e: tvlap::Error) -> Self {
        match e {
            // Runtime breakdown on otherwise valid input is analytic;
            // everything else stems from flags or file contents.
            tvlap::Error::NonPositiveInnovationVariance { .. } => CliError::Analytic(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Flat `key=value` configuration file; `#` starts a comment. Keys match
/// the long flag names.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{}:{}: expected key=value, got {raw:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::usage(format!("config key {key}: cannot parse value {raw:?}"))
            }),
        }
    }
}

/// Resolves flag / config-file / default precedence for one value.
pub fn pick<T: FromStr + Clone>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> CliResult<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(file.get::<T>(key)?.unwrap_or(default))
}

/// Noise-driver choice as a flag value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GChoice {
    G1,
    G2,
    G3,
}

impl GChoice {
    pub fn variant(self) -> GVariant {
        match self {
            GChoice::G1 => GVariant::G1,
            GChoice::G2 => GVariant::G2,
            GChoice::G3 => GVariant::G3,
        }
    }
}

impl FromStr for GChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "g1" => Ok(GChoice::G1),
            "g2" => Ok(GChoice::G2),
            "g3" => Ok(GChoice::G3),
            other => Err(format!(
                "unknown driver variant {other:?} (expected g1|g2|g3)"
            )),
        }
    }
}

/// Extrema-mode choice as a flag value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Threshold,
    Zerocross,
}

impl ModeChoice {
    pub fn mode(self) -> tvlap::analysis::ExtremaMode {
        match self {
            ModeChoice::Threshold => tvlap::analysis::ExtremaMode::Threshold,
            ModeChoice::Zerocross => tvlap::analysis::ExtremaMode::ZeroCross,
        }
    }
}

impl FromStr for ModeChoice {
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "threshold" => Ok(ModeChoice::Threshold),
            "zerocross" => Ok(ModeChoice::Zerocross),
            other => Err(format!(
                "unknown extrema mode {other:?} (expected threshold|zerocross)"
            )),
        }
    }

    type Err = String;
}

/// Model flags shared by the filtering subcommands.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Polynomial order K (the state holds the trend and K derivatives)
    #[arg(long)]
    pub k: Option<usize>,
    /// Model time gap T (a pure model parameter, independent of the data
    /// grid; derivative estimates absorb the scale difference)
    #[arg(long)]
    pub t: Option<f64>,
    /// Process-noise driver shape
    #[arg(long, value_enum)]
    pub g: Option<GChoice>,
    /// Process-noise variance: a scalar, or a comma-separated diagonal
    #[arg(long)]
    pub q: Option<String>,
    /// Measurement-noise variance
    #[arg(long)]
    pub r: Option<f64>,
    /// Derivative-zero threshold for extrema classification
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Initial covariance scale (the "infinite" prior)
    #[arg(long)]
    pub infinity: Option<f64>,
}

/// Per-subcommand defaults for the model flags.
pub struct ModelDefaults {
    pub k: usize,
    pub t: f64,
    pub g: GChoice,
    pub q: &'static str,
    pub r: f64,
}

/// General-purpose tracking defaults: smooth-trend extraction from
/// unit-variance noise.
pub const TRACKING_DEFAULTS: ModelDefaults = ModelDefaults {
    k: 4,
    t: 0.1,
    g: GChoice::G1,
    q: "1e-8",
    r: 1.0,
};

/// Observation-heavy defaults for fault diagnosis: large process noise
/// on the third derivative, small measurement variance.
pub const DIAGNOSIS_DEFAULTS: ModelDefaults = ModelDefaults {
    k: 4,
    t: 0.001,
    g: GChoice::G3,
    q: "0,0,0,250000,0",
    r: 0.03,
};

impl ModelArgs {
    pub fn resolve(&self, file: &FileConfig, defaults: &ModelDefaults) -> CliResult<TvlapConfig> {
        let k = pick(self.k, file, "k", defaults.k)?;
        let t = pick(self.t, file, "t", defaults.t)?;
        let g = pick(self.g, file, "g", defaults.g)?;
        let q_text = pick(self.q.clone(), file, "q", defaults.q.to_string())?;
        let r = pick(self.r, file, "r", defaults.r)?;
        let q = parse_q(&q_text, k, g.variant())?;
        let mut config = TvlapConfig::new(k, t, g.variant(), q, r)?;
        if let Some(eps) = pick(self.epsilon, file, "epsilon", f64::NAN).map(nan_to_none)? {
            config = config.with_epsilon(eps)?;
        }
        if let Some(inf) = pick(self.infinity, file, "infinity", f64::NAN).map(nan_to_none)? {
            config = config.with_infinity(inf)?;
        }
        Ok(config)
    }
}

fn nan_to_none(v: f64) -> Option<f64> {
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

/// Parses the `--q` flag: a single variance (scalar for the G1 driver,
/// uniform diagonal otherwise) or a comma-separated diagonal.
pub fn parse_q(text: &str, k: usize, variant: GVariant) -> CliResult<Matrix> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let parts = parts.map_err(|_| CliError::usage(format!("cannot parse --q value {text:?}")))?;
    let matrix = match (parts.len(), variant) {
        (1, GVariant::G1) => Matrix::from_rows(&[&[parts[0]]]),
        (1, _) => {
            let dim = k + 1;
            let mut m = Matrix::zeros(dim, dim);
            for i in 0..dim {
                m[(i, i)] = parts[0];
            }
            Ok(m)
        }
        (n, _) => {
            let mut m = Matrix::zeros(n, n);
            for (i, v) in parts.iter().enumerate() {
                m[(i, i)] = *v;
            }
            Ok(m)
        }
    };
    matrix.map_err(CliError::from)
}

/// Verifies that a path's parent directory exists before a run starts.
pub fn check_writable(path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() && !parent.exists() {
            return Err(CliError::usage(format!(
                "output directory {} does not exist",
                parent.display()
            )));
        }
    }
    Ok(())
}
