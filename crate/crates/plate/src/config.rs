//! Flat `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("unknown key `{key}`")]
    UnknownKey { key: String },

    #[error("key `{key}` given twice (line {line})")]
    Duplicate { key: String, line: usize },

    #[error("key `{key}`: expected {expected}, got `{value}`")]
    Type { key: &'static str, expected: &'static str, value: String },

    #[error("key `{key}`: {reason}")]
    Constraint { key: &'static str, reason: String },

    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    SourceUniform,
    SourceAdaptive,
    EigenAdaptive,
    /// `u = sin²(πx) sin²(πy)` on the unit square, uniform refinement.
    Manufactured,
}

impl Mode {
    pub fn is_eigen(self) -> bool {
        self == Mode::EigenAdaptive
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::SourceUniform => "source_uniform",
            Mode::SourceAdaptive => "source_adaptive",
            Mode::EigenAdaptive => "eigen_adaptive",
            Mode::Manufactured => "manufactured",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    LShape,
    UnitSquare,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::LShape => "lshape",
            DomainKind::UnitSquare => "unit_square",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ell {
    /// `k + 2`.
    Auto,
    Explicit(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub domain: DomainKind,
    pub k: usize,
    pub ell: Ell,
    pub sigma: f64,
    pub theta: f64,
    pub eig_index: usize,
    pub max_ndof: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Fill the `seconds` column of history.csv.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::SourceAdaptive,
            domain: DomainKind::LShape,
            k: 0,
            ell: Ell::Auto,
            sigma: 0.4086,
            theta: 0.5,
            eig_index: 1,
            max_ndof: 50_000,
            output_dir: PathBuf::from("output"),
            seed: 0,
            timing: false,
        }
    }
}

pub const KEYS: [&str; 11] = ["mode", "domain", "k", "ell", "sigma", "theta", "eig_index", "max_ndof", "output_dir", "seed", "timing"];

fn number<T: FromStr>(key: &'static str, value: &str, expected: &'static str) -> Result<T> {
    value.parse().map_err(|_| ConfigError::Type {
        key,
        expected,
        value: value.to_string(),
    })
}

impl RunConfig {
    /// Cell degree after resolving `auto`.
    pub fn ell(&self) -> usize {
        match self.ell {
            Ell::Auto => self.k + 2,
            Ell::Explicit(l) => l,
        }
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "mode" => {
                self.mode = match value {
                    "source_uniform" => Mode::SourceUniform,
                    "source_adaptive" => Mode::SourceAdaptive,
                    "eigen_adaptive" => Mode::EigenAdaptive,
                    "manufactured" => Mode::Manufactured,
                    _ => {
                        return Err(ConfigError::Type {
                            key: "mode",
                            expected: "one of source_uniform, source_adaptive, eigen_adaptive, manufactured",
                            value: value.into(),
                        })
                    }
                }
            }
            "domain" => {
                self.domain = match value {
                    "lshape" => DomainKind::LShape,
                    "unit_square" => DomainKind::UnitSquare,
                    _ => {
                        return Err(ConfigError::Type {
                            key: "domain",
                            expected: "lshape or unit_square",
                            value: value.into(),
                        })
                    }
                }
            }
            "k" => self.k = number("k", value, "a non-negative integer")?,
            "ell" => {
                self.ell = if value == "auto" {
                    Ell::Auto
                } else {
                    Ell::Explicit(number("ell", value, "`auto` or a non-negative integer")?)
                }
            }
            "sigma" => self.sigma = number("sigma", value, "a real number")?,
            "theta" => self.theta = number("theta", value, "a real number")?,
            "eig_index" => self.eig_index = number("eig_index", value, "a positive integer")?,
            "max_ndof" => self.max_ndof = number("max_ndof", value, "a positive integer")?,
            "output_dir" => {
                if value.is_empty() {
                    return Err(ConfigError::Constraint {
                        key: "output_dir",
                        reason: "must not be empty".into(),
                    });
                }
                self.output_dir = PathBuf::from(value)
            }
            "seed" => self.seed = number("seed", value, "a non-negative integer")?,
            "timing" => self.timing = number("timing", value, "true or false")?,
            _ => return Err(ConfigError::UnknownKey { key: key.to_string() }),
        }
        Ok(())
    }

    /// Checks the constraints between fields.
    pub fn validate(&self) -> Result<()> {
        let fail = |key, reason: String| Err(ConfigError::Constraint { key, reason });
        if self.k > 4 {
            return fail("k", format!("must lie in 0..=4, got {}", self.k));
        }
        let ell = self.ell();
        let min = self.k.saturating_sub(2);
        if ell < min {
            return fail("ell", format!("must be at least max(k-2, 0) = {min}, got {ell}"));
        }
        if self.mode.is_eigen() && ell != self.k + 2 {
            return fail("ell", format!("eigen mode requires ell = k+2 = {}, got {ell}", self.k + 2));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return fail("sigma", format!("must be positive, got {}", self.sigma));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return fail("theta", format!("must lie in (0, 1], got {}", self.theta));
        }
        if self.eig_index == 0 {
            return fail("eig_index", "must be at least 1".into());
        }
        if self.max_ndof == 0 {
            return fail("max_ndof", "must be positive".into());
        }
        if self.mode == Mode::Manufactured && self.domain != DomainKind::UnitSquare {
            return fail("domain", "manufactured mode runs on unit_square".into());
        }
        Ok(())
    }

    /// Parses config text, then applies `overrides` in order.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.into() });
            };
            let key = key.trim();
            if seen.iter().any(|s| s == key) {
                return Err(ConfigError::Duplicate { key: key.into(), line: i + 1 });
            }
            cfg.set(key, value)?;
            seen.push(key.into());
        }
        for (key, value) in overrides {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, overrides)
    }
}

impl fmt::Display for RunConfig {
    /// The config in its own file format; parsing it back gives the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode = {}", self.mode.name())?;
        writeln!(f, "domain = {}", self.domain.name())?;
        writeln!(f, "k = {}", self.k)?;
        match self.ell {
            Ell::Auto => writeln!(f, "ell = auto")?,
            Ell::Explicit(l) => writeln!(f, "ell = {l}")?,
        }
        writeln!(f, "sigma = {:?}", self.sigma)?;
        writeln!(f, "theta = {:?}", self.theta)?;
        writeln!(f, "eig_index = {}", self.eig_index)?;
        writeln!(f, "max_ndof = {}", self.max_ndof)?;
        writeln!(f, "output_dir = {}", self.output_dir.display())?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "timing = {}", self.timing)
    }
}
