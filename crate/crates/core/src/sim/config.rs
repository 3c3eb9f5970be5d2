//! Experiment configuration files.
//!
//! A configuration is a flat TOML document:
//!
//! ```toml
//! schema_version = 1
//! name = "example"
//! antennas = ["2x2", "4x4"]     # M transmit x N receive
//! qam = [16]
//! scheme = "sm"                 # "sm" or "golden"
//! decoders = ["sphere", "sb-stack:bias=0.5"]
//! snr_db = [0, 5, 10]           # or snr_min / snr_max / snr_step
//! trials = 10000
//! target_errors = 200           # 0 runs every trial
//! seed = 1
//! coded = false                 # true: SNR values are Eb/N0
//! frame_bits = 200
//! interleave = false
//! workers = 0                   # 0 uses every core
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::sim::decoder::DecoderSpec;

/// The only configuration layout understood by this version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Spatial multiplexing.
    #[default]
    Sm,
    /// The 2x2 Golden code.
    Golden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub antennas: Vec<String>,
    pub qam: Vec<u32>,
    #[serde(default)]
    pub scheme: Scheme,
    pub decoders: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snr_db: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_step: Option<f64>,
    pub trials: u64,
    #[serde(default)]
    pub target_errors: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub coded: bool,
    #[serde(default = "default_frame_bits")]
    pub frame_bits: usize,
    #[serde(default)]
    pub interleave: bool,
    #[serde(default)]
    pub workers: usize,
}

fn default_seed() -> u64 {
    1
}

fn default_frame_bits() -> usize {
    200
}

/// Transmit and receive antenna counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Antennas {
    pub num_tx: usize,
    pub num_rx: usize,
}

impl std::str::FromStr for Antennas {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parsed = s
            .split_once(['x', 'X'])
            .and_then(|(m, n)| Some((m.trim().parse().ok()?, n.trim().parse().ok()?)));
        match parsed {
            Some((num_tx, num_rx)) if num_tx > 0 && num_rx >= num_tx => Ok(Self { num_tx, num_rx }),
            _ => Err(Error::Config(format!(
                "antenna setup {s:?} must read MxN with N ≥ M ≥ 1"
            ))),
        }
    }
}

impl std::fmt::Display for Antennas {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.num_tx, self.num_rx)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SNR points, from the explicit list or the min/max/step range.
    pub fn snr_points(&self) -> Result<Vec<f64>> {
        let points = match (self.snr_min, self.snr_max, self.snr_step) {
            (None, None, None) => self.snr_db.clone(),
            (Some(lo), Some(hi), Some(step)) if self.snr_db.is_empty() => {
                if !(step > 0.0) || hi < lo {
                    return Err(Error::Config(format!(
                        "SNR range {lo}..{hi} step {step} is empty"
                    )));
                }
                let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| lo + i as f64 * step).collect()
            }
            _ => {
                return Err(Error::Config(
                    "give either snr_db or all of snr_min, snr_max and snr_step".into(),
                ))
            }
        };
        if points.is_empty() {
            return Err(Error::Config("the SNR grid is empty".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("the SNR grid must be strictly increasing".into()));
        }
        Ok(points)
    }

    pub fn antenna_setups(&self) -> Result<Vec<Antennas>> {
        self.antennas.iter().map(|s| s.parse()).collect()
    }

    pub fn constellations(&self) -> Result<Vec<Constellation>> {
        self.qam.iter().map(|&q| Constellation::new(q)).collect()
    }

    pub fn decoder_specs(&self) -> Result<Vec<DecoderSpec>> {
        self.decoders.iter().map(|s| s.parse()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.antennas.is_empty() || self.qam.is_empty() || self.decoders.is_empty() {
            return Err(Error::Config(
                "antennas, qam and decoders must be nonempty".into(),
            ));
        }
        self.snr_points()?;
        let setups = self.antenna_setups()?;
        self.constellations()?;
        let specs = self.decoder_specs()?;
        if self.scheme == Scheme::Golden && setups.iter().any(|a| a.num_tx != 2 || a.num_rx != 2) {
            return Err(Error::Config("the Golden code needs a 2x2 system".into()));
        }
        if self.coded && self.frame_bits == 0 {
            return Err(Error::Config("frame_bits must be at least 1".into()));
        }
        for spec in &specs {
            if spec.kind.is_list() && !self.coded {
                return Err(Error::Config(format!(
                    "{} produces soft output; it needs coded = true",
                    spec.label
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
        schema_version = 1
        antennas = ["2x2"]
        qam = [4]
        decoders = ["ml"]
        snr_db = [0, 10]
        trials = 10
    "#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(c.seed, 1);
        assert_eq!(c.scheme, Scheme::Sm);
        assert_eq!(c.frame_bits, 200);
        assert_eq!(c.snr_points().unwrap(), vec![0.0, 10.0]);
        assert_eq!(ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }

    #[test]
    fn snr_range() {
        let text = BASIC.replace("snr_db = [0, 10]", "snr_min = 0\nsnr_max = 10\nsnr_step = 2.5");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.snr_points().unwrap(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
    }

    #[test]
    fn validation_errors() {
        for (from, to) in [
            ("trials = 10", "trials = 0"),
            ("schema_version = 1", "schema_version = 2"),
            ("snr_db = [0, 10]", "snr_db = [10, 0]"),
            ("snr_db = [0, 10]", "snr_db = []"),
            ("[\"2x2\"]", "[\"2by2\"]"),
            ("[\"2x2\"]", "[\"4x2\"]"),
            ("qam = [4]", "qam = [8]"),
            ("[\"ml\"]", "[\"magic\"]"),
            ("[\"ml\"]", "[\"lsd\"]"),
            ("trials = 10", "trials = 10\nbogus = 1"),
        ] {
            let text = BASIC.replace(from, to);
            assert!(ExperimentConfig::from_toml_str(&text).is_err(), "{to}");
        }
    }

    #[test]
    fn antennas_parse() {
        assert_eq!(
            "4x4".parse::<Antennas>().unwrap(),
            Antennas { num_tx: 4, num_rx: 4 }
        );
        assert_eq!("2x3".parse::<Antennas>().unwrap().to_string(), "2x3");
    }
}
