//! Desk-scale experiment presets.

use super::config::{ExperimentConfig, Scheme, SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 6] = ["fig3", "fig6", "fig7", "fig8", "fig9", "fig13"];

/// One-line description of each preset.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig3" => "4x4 SM, 4-QAM: neighborhood stack with t = 1..4 against ZF-DFE and lattice ML",
        "fig6" => "2x2 and 4x4 SM, 16-QAM lattice decoding: SB-Stack vs sphere complexity",
        "fig7" => "4x4 SM, 16- and 64-QAM: full-tree stack decoder vs sphere complexity",
        "fig8" => "4x4 SM, 16-QAM: boxed SB-Stack vs sphere complexity",
        "fig9" => "2x2 SM, 16-QAM: SB-Stack bias sweep against ML and ZF-DFE",
        "fig13" => "2x2 SM, 4-QAM, rate-1/2 (7,5) code: soft SB-Stack, LSD and ML-centred lists of 6",
        _ => return None,
    })
}

fn base(name: &str, antennas: &[&str], qam: &[u32], decoders: &[&str]) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        antennas: antennas.iter().map(|s| s.to_string()).collect(),
        qam: qam.to_vec(),
        scheme: Scheme::Sm,
        decoders: decoders.iter().map(|s| s.to_string()).collect(),
        snr_db: Vec::new(),
        snr_min: None,
        snr_max: None,
        snr_step: None,
        trials: 10_000,
        target_errors: 0,
        seed: 1,
        coded: false,
        frame_bits: 200,
        interleave: false,
        workers: 0,
    }
}

fn range(mut c: ExperimentConfig, lo: f64, hi: f64, step: f64) -> ExperimentConfig {
    c.snr_min = Some(lo);
    c.snr_max = Some(hi);
    c.snr_step = Some(step);
    c
}

/// The configuration behind a preset name.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let config = match name {
        "fig3" => {
            let mut c = base(
                name,
                &["4x4"],
                &[4],
                &[
                    "zf-dfe:domain=lattice",
                    "neighbor-stack:t=1",
                    "neighbor-stack:t=2",
                    "neighbor-stack:t=3",
                    "neighbor-stack:t=4",
                    "ml:domain=lattice",
                ],
            );
            c.trials = 20_000;
            c.target_errors = 500;
            range(c, 0.0, 20.0, 2.0)
        }
        "fig6" => {
            let c = base(
                name,
                &["2x2", "4x4"],
                &[16],
                &["sphere:domain=lattice", "sb-stack:domain=lattice"],
            );
            range(c, 0.0, 20.0, 5.0)
        }
        "fig7" => {
            let mut c = base(name, &["4x4"], &[16, 64], &["stack", "sphere"]);
            c.trials = 500;
            range(c, 0.0, 20.0, 5.0)
        }
        "fig8" => {
            let c = base(name, &["4x4"], &[16], &["sphere", "sb-stack"]);
            range(c, 0.0, 20.0, 5.0)
        }
        "fig9" => {
            let mut c = base(
                name,
                &["2x2"],
                &[16],
                &[
                    "ml",
                    "zf-dfe",
                    "sb-stack:bias=0",
                    "sb-stack:bias=0.1",
                    "sb-stack:bias=0.5",
                    "sb-stack:bias=1",
                    "sb-stack:bias=10",
                ],
            );
            c.trials = 20_000;
            range(c, 0.0, 20.0, 2.0)
        }
        "fig13" => {
            let mut c = base(
                name,
                &["2x2"],
                &[4],
                &["soft-sb-stack:list=6", "lsd:list=6", "ssd:list=6", "zf-dfe"],
            );
            c.coded = true;
            c.trials = 1_000;
            range(c, 0.0, 10.0, 2.0)
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    debug_assert!(config.validate().is_ok());
    Ok(config)
}
