//! Configuration-driven Monte Carlo experiments producing SER, BER and
//! complexity tables.

mod config;
mod decoder;
mod presets;
mod runner;

pub use config::{Antennas, ExperimentConfig, Scheme, SCHEMA_VERSION};
pub use decoder::{DecoderKind, DecoderSpec, Domain, RadiusChoice};
pub use presets::{describe, preset, PRESETS};
pub use runner::{run_experiment, run_experiment_with_progress, write_csv, ResultRow};
