//! Experiment configuration: a TOML file mirrors every CLI flag, and
//! explicitly passed flags override the file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Which inequality the verify driver runs.
    pub inequality: String,
    pub dim: usize,
    pub n: usize,
    pub period: f64,
    /// Weight name: unit | log | log_power.
    pub weight: String,
    /// Exponent for the log_power weight.
    pub weight_alpha: f64,
    /// Band-pass annulus [alpha, beta].
    pub alpha: f64,
    pub beta: f64,
    pub nodes_per_octave: usize,
    pub trials: usize,
    /// Inclusive dilation range, e.g. "-3..3".
    pub dilations: String,
    pub seed: u64,
    /// Fractional order for the kato-ponce inequality.
    pub s: f64,
    pub out: Option<PathBuf>,
    /// Override for oracle-suite tolerances (bilinear paths).
    pub tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            inequality: "thm-main".into(),
            dim: 1,
            n: 256,
            period: 2.0 * std::f64::consts::PI,
            weight: "log".into(),
            weight_alpha: 2.0,
            alpha: 1.0,
            beta: 4.0,
            nodes_per_octave: 16,
            trials: 20,
            dilations: "-3..3".into(),
            seed: 42,
            s: 1.5,
            out: None,
            tolerance: 1e-9,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Format(format!("config parse error: {e}")))
    }

    pub fn dilation_range(&self) -> Result<Vec<i32>> {
        parse_dilations(&self.dilations)
    }
}

/// Parse an inclusive integer range "a..b" (also accepts a single integer).
pub fn parse_dilations(s: &str) -> Result<Vec<i32>> {
    let s = s.trim();
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim()
                .parse::<i32>()
                .map_err(|_| Error::Format(format!("bad dilation bound: {a}")))?,
            b.trim()
                .parse::<i32>()
                .map_err(|_| Error::Format(format!("bad dilation bound: {b}")))?,
        ),
        None => {
            let v = s
                .parse::<i32>()
                .map_err(|_| Error::Format(format!("bad dilation range: {s}")))?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(Error::Format(format!("empty dilation range: {s}")));
    }
    Ok((lo..=hi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilation_parsing() {
        assert_eq!(parse_dilations("-3..3").unwrap(), vec![-3, -2, -1, 0, 1, 2, 3]);
        assert_eq!(parse_dilations("0..0").unwrap(), vec![0]);
        assert_eq!(parse_dilations("2").unwrap(), vec![2]);
        assert!(parse_dilations("3..-3").is_err());
        assert!(parse_dilations("x..y").is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = ExperimentConfig { n: 128, seed: 7, ..Default::default() };
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn file_load_with_partial_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "n = 64\nweight = \"unit\"\n").unwrap();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.weight, "unit");
        assert_eq!(cfg.trials, ExperimentConfig::default().trials);
    }
}
