//! TOML experiment configuration.
//!
//! ```toml
//! [kernel]
//! type = "pure_power"
//! s = 0.75
//!
//! [lattice]
//! h_ladder = [0.25, 0.125, 0.0625, 0.03125]
//! box_length = 64.0
//!
//! [datum]
//! type = "gaussian"
//! width = 1.0
//!
//! [evolution]
//! sign = "defocusing"
//! t_final = 0.5
//! dt = 0.001
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use latnls_core::dynamics::Scheme;
use latnls_core::kernel::{KernelClass, KernelSpec, DEFAULT_EVAL_CUTOFF};
use latnls_core::lattice::Sign;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datum::DatumSpec;

pub const REQUIRED_SECTIONS: [&str; 4] = ["kernel", "lattice", "datum", "evolution"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("missing section [{0}]")]
    MissingSection(String),
    #[error("mesh sizes must divide box length {length} into a power of two; offending h: {offending:?}")]
    BadLadder { length: f64, offending: Vec<f64> },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    PurePower {
        s: f64,
        #[serde(default = "default_cutoff")]
        eval_cutoff: usize,
    },
    NearestNeighbor,
    Exponential {
        rate: f64,
        #[serde(default = "default_cutoff")]
        eval_cutoff: usize,
    },
    /// Explicit `J_1, J_2, ...`; `class` is a number or `"inf"`.
    Table {
        values: Vec<f64>,
        class: ClassValue,
        #[serde(default = "default_cutoff")]
        eval_cutoff: usize,
    },
}

fn default_cutoff() -> usize {
    DEFAULT_EVAL_CUTOFF
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassValue {
    Finite(f64),
    Named(InfinityTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfinityTag {
    Inf,
}

impl KernelConfig {
    pub fn spec(&self) -> KernelSpec {
        match self {
            KernelConfig::PurePower { s, .. } => KernelSpec::PurePower { s: *s },
            KernelConfig::NearestNeighbor => KernelSpec::NearestNeighbor,
            KernelConfig::Exponential { rate, .. } => KernelSpec::Exponential { rate: *rate },
            KernelConfig::Table { values, class, .. } => KernelSpec::Table {
                values: values.clone(),
                declared_class: match class {
                    ClassValue::Finite(s) => KernelClass::Finite(*s),
                    ClassValue::Named(InfinityTag::Inf) => KernelClass::Infinite,
                },
            },
        }
    }

    pub fn eval_cutoff(&self) -> usize {
        match self {
            KernelConfig::PurePower { eval_cutoff, .. }
            | KernelConfig::Exponential { eval_cutoff, .. }
            | KernelConfig::Table { eval_cutoff, .. } => *eval_cutoff,
            KernelConfig::NearestNeighbor => DEFAULT_EVAL_CUTOFF,
        }
    }

    pub fn build(&self) -> latnls_core::Result<latnls_core::Kernel> {
        latnls_core::build_kernel(self.spec(), self.eval_cutoff())
    }

    /// Parses the command-line form `pure_power:s=0.75`, `nearest_neighbor`,
    /// `exponential:rate=1`.
    pub fn parse_short(text: &str) -> Result<Self, ConfigError> {
        let (name, args) = text.split_once(':').unwrap_or((text, ""));
        let mut table = toml::Table::new();
        table.insert("type".into(), toml::Value::String(name.trim().into()));
        for kv in args.split(',').filter(|a| !a.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ConfigError::Invalid(format!("expected key=value in kernel spec, got {kv:?}")))?;
            let value: toml::Value = v
                .trim()
                .parse::<f64>()
                .map(toml::Value::Float)
                .unwrap_or_else(|_| toml::Value::String(v.trim().into()));
            let value = match (k.trim(), value) {
                ("eval_cutoff", toml::Value::Float(f)) => toml::Value::Integer(f as i64),
                (_, v) => v,
            };
            table.insert(k.trim().into(), value);
        }
        toml::Value::Table(table).try_into::<KernelConfig>().map_err(|e| ConfigError::Invalid(format!("kernel {text:?}: {e}")))
    }
}

impl fmt::Display for KernelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&latnls_core::verify::kernel_label(&self.spec()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub h_ladder: Vec<f64>,
    pub box_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConfig {
    Focusing,
    Defocusing,
}

impl From<SignConfig> for Sign {
    fn from(s: SignConfig) -> Self {
        match s {
            SignConfig::Focusing => Sign::Focusing,
            SignConfig::Defocusing => Sign::Defocusing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeConfig {
    Strang,
    Lie,
}

impl From<SchemeConfig> for Scheme {
    fn from(s: SchemeConfig) -> Self {
        match s {
            SchemeConfig::Strang => Scheme::Strang,
            SchemeConfig::Lie => Scheme::Lie,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub sign: SignConfig,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeConfig,
    /// Number of report times including `t = 0` and `t_final`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_scheme() -> SchemeConfig {
    SchemeConfig::Strang
}

fn default_samples() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    /// `h_ref = h_min / refinement`.
    #[serde(default = "default_refinement")]
    pub refinement: usize,
    /// `dt_ref = dt / dt_divisor`.
    #[serde(default = "default_dt_divisor")]
    pub dt_divisor: usize,
}

fn default_refinement() -> usize {
    8
}

fn default_dt_divisor() -> usize {
    10
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self { refinement: default_refinement(), dt_divisor: default_dt_divisor() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelConfig,
    pub lattice: LatticeConfig,
    pub datum: DatumSpec,
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub test_functions: Vec<DatumSpec>,
    #[serde(default)]
    pub reference: ReferenceSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn parse_error(text: &str, err: toml::de::Error) -> ConfigError {
    let (line, column) = err.span().map_or((0, 0), |s| line_column(text, s.start));
    ConfigError::Parse { line, column, message: err.message().to_string() }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, e))?;
        for section in REQUIRED_SECTIONS {
            if !table.contains_key(section) {
                return Err(ConfigError::MissingSection(section.to_string()));
            }
        }
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config always serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let l = self.lattice.box_length;
        if !(l > 0.0 && l.is_finite()) {
            return Err(ConfigError::Invalid(format!("box_length must be positive, got {l}")));
        }
        let ladder = &self.lattice.h_ladder;
        if ladder.is_empty() {
            return Err(ConfigError::Invalid("h_ladder is empty".into()));
        }
        let offending: Vec<f64> = ladder.iter().copied().filter(|&h| sites_for(l, h).is_none()).collect();
        if !offending.is_empty() {
            return Err(ConfigError::BadLadder { length: l, offending });
        }
        if ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ConfigError::Invalid(format!("h_ladder must be strictly descending, got {ladder:?}")));
        }
        let ev = &self.evolution;
        if !(ev.dt > 0.0 && ev.dt.is_finite() && ev.t_final > 0.0 && ev.t_final.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "dt and t_final must be positive, got dt = {}, t_final = {}",
                ev.dt, ev.t_final
            )));
        }
        if ev.samples < 2 {
            return Err(ConfigError::Invalid("evolution.samples must be at least 2".into()));
        }
        let steps = (ev.t_final / ev.dt).round() as usize;
        if ((steps as f64) * ev.dt - ev.t_final).abs() > 1e-9 * ev.t_final || !steps.is_multiple_of(ev.samples - 1) {
            return Err(ConfigError::Invalid(format!(
                "t_final / dt = {} steps must be an integer divisible by samples - 1 = {}",
                ev.t_final / ev.dt,
                ev.samples - 1
            )));
        }
        let r = self.reference.refinement;
        if r == 0 || !r.is_power_of_two() || self.reference.dt_divisor == 0 {
            return Err(ConfigError::Invalid(
                "reference.refinement must be a power of two and dt_divisor positive".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.evolution.t_final / self.evolution.dt).round() as usize
    }

    pub fn h_min(&self) -> f64 {
        self.lattice.h_ladder.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `N = L / h` when it is an integer power of two and `0 < h < 1`.
pub fn sites_for(length: f64, h: f64) -> Option<usize> {
    if !(h > 0.0 && h < 1.0) {
        return None;
    }
    let n = length / h;
    let rounded = n.round();
    if rounded < 2.0 || (n - rounded).abs() > 1e-9 * n {
        return None;
    }
    let n = rounded as usize;
    n.is_power_of_two().then_some(n)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    ExperimentConfig::from_toml_str(&text)
}

/// Kernel list for the `check` subcommand: `[[kernels]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub kernels: Vec<KernelConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

pub fn parse_suite_config(path: &Path) -> Result<SuiteConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    toml::from_str(&text).map_err(|e| parse_error(&text, e))
}
