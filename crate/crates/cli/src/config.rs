use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use casiga::benchmarks::BenchmarkKind;
use casiga::Technology;

use crate::CliError;

/// Largest refinement level accepted for the 2D benchmarks (256x256 elements).
pub const MAX_LEVELS: usize = 8;
/// Largest number of sample intervals per element and direction.
pub const MAX_SAMPLES: usize = 32;

/// Keys of the text form, in the order they are written.
pub const KEYS: [&str; 6] = ["benchmark", "technology", "quad", "levels", "out", "samples"];

/// One benchmark run.
///
/// The text form is one `key=value` per line in the order of [`KEYS`]. Values
/// are taken verbatim after the first `=`, so the form round-trips exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub benchmark: BenchmarkKind,
    pub technology: Technology,
    pub quadrature_points: usize,
    pub levels: usize,
    pub out_dir: PathBuf,
    /// Sample intervals per element and direction for the field file of the
    /// finest level; 0 disables field output.
    pub samples_per_element: usize,
}

impl RunConfig {
    pub fn new(benchmark: BenchmarkKind) -> Self {
        Self {
            benchmark,
            technology: Technology::Cas1,
            quadrature_points: 3,
            levels: 1,
            out_dir: PathBuf::from("out"),
            samples_per_element: 4,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(2..=3).contains(&self.quadrature_points) {
            return Err(CliError::Config(format!("quad must be 2 or 3, got {}", self.quadrature_points)));
        }
        let max_levels = match self.benchmark {
            BenchmarkKind::Block3d => 1,
            _ => MAX_LEVELS,
        };
        if !(1..=max_levels).contains(&self.levels) {
            return Err(CliError::Config(format!(
                "levels for {} must be in 1..={max_levels}, got {}",
                self.benchmark, self.levels
            )));
        }
        if self.samples_per_element > MAX_SAMPLES {
            return Err(CliError::Config(format!(
                "samples must be at most {MAX_SAMPLES}, got {}",
                self.samples_per_element
            )));
        }
        match self.out_dir.to_str() {
            None => return Err(CliError::Config("out must be valid UTF-8".into())),
            Some("") => return Err(CliError::Config("out must not be empty".into())),
            Some(s) if s.contains(['\n', '\r']) => {
                return Err(CliError::Config("out must not contain line breaks".into()))
            }
            Some(_) => {}
        }
        Ok(())
    }

    /// Applies one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("invalid {key} '{value}': {what}"));
        match key {
            "benchmark" => self.benchmark = value.parse().map_err(|e: String| bad(&e))?,
            "technology" => self.technology = value.parse().map_err(|e: String| bad(&e))?,
            "quad" => self.quadrature_points = value.parse().map_err(|_| bad("expected 2 or 3"))?,
            "levels" => self.levels = value.parse().map_err(|_| bad("expected a positive integer"))?,
            "out" => self.out_dir = PathBuf::from(value),
            "samples" => self.samples_per_element = value.parse().map_err(|_| bad("expected an integer"))?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key '{key}' (expected one of {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key=value` argument.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got '{pair}'")))?;
        self.set(key.trim(), value)
    }

    /// Builds a config from `key=value` pairs. `benchmark` is required; later
    /// pairs override earlier ones.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = &'a str>) -> Result<Self, CliError> {
        let pairs: Vec<&str> = pairs.into_iter().collect();
        let benchmark = pairs
            .iter()
            .rev()
            .filter_map(|p| p.split_once('='))
            .find(|(k, _)| k.trim() == "benchmark")
            .ok_or_else(|| CliError::Config("missing benchmark".into()))?
            .1;
        let mut config = Self::new(benchmark.parse().map_err(CliError::Config)?);
        for pair in pairs {
            config.set_pair(pair)?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Parses the text form. Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self, CliError> {
        Self::from_pairs(
            text.lines()
                .map(|l| l.strip_suffix('\r').unwrap_or(l))
                .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')),
        )
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "benchmark={}", self.benchmark)?;
        writeln!(f, "technology={}", self.technology)?;
        writeln!(f, "quad={}", self.quadrature_points)?;
        writeln!(f, "levels={}", self.levels)?;
        writeln!(f, "out={}", self.out_dir.display())?;
        writeln!(f, "samples={}", self.samples_per_element)
    }
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_text(s)
    }
}
