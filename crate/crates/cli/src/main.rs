//! Command-line front end for the sbstack Monte Carlo experiments.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sbstack::sim::{self, DecoderKind, ExperimentConfig, ResultRow};

const NOISE_NOTE: &str = "SNR is the total receive SNR M·Es/N0 (uncoded) or Eb/N0 (coded). \
Radius formulas use the noise variance per real dimension, σ² = N0/2.";

#[derive(Parser)]
#[command(name = "sbstack", version, about = "MIMO lattice decoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write the result table as CSV.
    #[command(after_help = NOISE_NOTE)]
    Run(RunArgs),
    /// List the decoder names and their parameters.
    ListDecoders,
    /// List the built-in presets.
    ListPresets,
    /// Print a preset as a configuration file.
    ShowPreset { name: String },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Trials (uncoded) or frames (coded) per SNR point.
    #[arg(long)]
    trials: Option<u64>,
    /// First SNR point in dB.
    #[arg(long, requires_all = ["snr_max", "snr_step"])]
    snr_min: Option<f64>,
    /// Last SNR point in dB.
    #[arg(long, requires_all = ["snr_min", "snr_step"])]
    snr_max: Option<f64>,
    /// SNR step in dB.
    #[arg(long, requires_all = ["snr_min", "snr_max"])]
    snr_step: Option<f64>,
    /// Suppress progress lines on stderr.
    #[arg(long, short)]
    quiet: bool,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => sim::preset(name)?,
            (None, None) => bail!("give --config or --preset"),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(workers) = self.workers {
            config.workers = workers;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let (Some(lo), Some(hi), Some(step)) = (self.snr_min, self.snr_max, self.snr_step) {
            config.snr_db.clear();
            config.snr_min = Some(lo);
            config.snr_max = Some(hi);
            config.snr_step = Some(step);
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let config = args.config()?;
    let quiet = args.quiet;
    let mut report = |row: &ResultRow| {
        if !quiet {
            eprintln!(
                "{:<32} {:>6.1} dB  trials {:>7}  errors {:>6}  ser {:.3e}  ber {:.3e}  mults {:.1}",
                row.decoder, row.snr_db, row.trials, row.error_events, row.ser, row.ber, row.mean_mults
            );
        }
    };
    let rows = sim::run_experiment_with_progress(&config, &mut report)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut out = BufWriter::new(file);
            sim::write_csv(&rows, &mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            sim::write_csv(&rows, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn list_decoders() {
    for kind in DecoderKind::ALL {
        println!("{:<16} {}", kind.name(), kind.summary());
        println!("{:<16} keys: {}", "", kind.keys().join(", "));
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(&args),
        Command::ListDecoders => {
            list_decoders();
            Ok(())
        }
        Command::ListPresets => {
            for name in sim::PRESETS {
                println!("{:<8} {}", name, sim::describe(name).unwrap_or_default());
            }
            Ok(())
        }
        Command::ShowPreset { name } => {
            print!("{}", sim::preset(&name)?.to_toml_string());
            Ok(())
        }
    }
}
