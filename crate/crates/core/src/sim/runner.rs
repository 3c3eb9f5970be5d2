//! Monte Carlo runner.
//!
//! Every trial draws its own channel, symbols and noise from a generator
//! seeded with [`split_seed`]`(seed, stream, trial)`, where `stream` encodes
//! the antenna/constellation group and the SNR index. All decoders of a run
//! see the same draws. Trials are processed in fixed-size chunks; the
//! target-error check happens between chunks, so results never depend on
//! the number of workers.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Antennas, ExperimentConfig, Scheme};
use super::decoder::DecoderSpec;
use crate::chain::{
    channel_sample, conv_encode, ebn0_to_sigma, noise_sample, qam_demap_bits, qam_map,
    real_to_symbols, snr_to_sigma, split_seed, viterbi_decode_soft, ConvCode,
    Interleaver,
};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::lattice::{qr_reduce, realify, stbc_flatten, StbcGenerator, TriangularSystem};
use crate::search::SearchLimits;
use crate::soft::{llr_maxlog, llr_quantize, DEFAULT_LLR_MAX};

/// Trials per chunk for uncoded runs (one trial is one channel use).
const UNCODED_CHUNK: u64 = 250;
/// Frames per chunk for coded runs.
const CODED_CHUNK: u64 = 10;
/// Code rate of the outer convolutional code.
const CODE_RATE: f64 = 0.5;
/// Stream reserved for the interleaver permutation.
const INTERLEAVER_STREAM: u64 = u64::MAX;

/// One line of results: one decoder at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub decoder: String,
    pub snr_db: f64,
    /// Trials that completed for this decoder.
    pub trials: u64,
    /// Trials abandoned because a search budget ran out.
    pub skipped: u64,
    /// Symbol errors (uncoded) or information-bit errors (coded).
    pub error_events: u64,
    /// Complex-symbol error rate of the hard decisions.
    pub ser: f64,
    /// Bit error rate: Gray-demapped detector bits (uncoded) or decoded
    /// information bits (coded).
    pub ber: f64,
    /// Mean real multiplications per detection.
    pub mean_mults: f64,
    /// Mean visited nodes per detection.
    pub mean_nodes: f64,
    pub seed: u64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    decoder: &'a str,
    snr_db: f64,
    trials: u64,
    error_events: u64,
    ser: f64,
    ber: f64,
    mean_mults: f64,
    mean_nodes: f64,
    seed: u64,
}

/// Writes rows under the header
/// `decoder,snr_db,trials,error_events,ser,ber,mean_mults,mean_nodes,seed`.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            decoder: &r.decoder,
            snr_db: r.snr_db,
            trials: r.trials,
            error_events: r.error_events,
            ser: r.ser,
            ber: r.ber,
            mean_mults: r.mean_mults,
            mean_nodes: r.mean_nodes,
            seed: r.seed,
        })
        .map_err(|e| Error::Config(format!("writing CSV: {e}")))?;
    }
    if rows.is_empty() {
        w.write_record([
            "decoder", "snr_db", "trials", "error_events", "ser", "ber", "mean_mults", "mean_nodes",
            "seed",
        ])
        .map_err(|e| Error::Config(format!("writing CSV: {e}")))?;
    }
    w.flush().map_err(|e| Error::Config(format!("writing CSV: {e}")))
}

/// Integer counters of one decoder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    skipped: u64,
    detections: u64,
    symbols: u64,
    symbol_errors: u64,
    bits: u64,
    bit_errors: u64,
    mults: u64,
    nodes: u64,
    coded: bool,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.trials += o.trials;
        self.skipped += o.skipped;
        self.detections += o.detections;
        self.symbols += o.symbols;
        self.symbol_errors += o.symbol_errors;
        self.bits += o.bits;
        self.bit_errors += o.bit_errors;
        self.mults += o.mults;
        self.nodes += o.nodes;
    }

    fn error_events(&self) -> u64 {
        if self.coded {
            self.bit_errors
        } else {
            self.symbol_errors
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Fixed inputs of one SNR point.
struct Point<'a> {
    antennas: Antennas,
    alphabet: &'a Constellation,
    scheme: Scheme,
    golden: &'a StbcGenerator,
    sigma2: f64,
    specs: &'a [DecoderSpec],
    seed: u64,
    stream: u64,
    limits: SearchLimits,
    frame_bits: usize,
    interleaver: Option<&'a Interleaver>,
}

impl Point<'_> {
    fn symbols_per_use(&self) -> usize {
        match self.scheme {
            Scheme::Sm => self.antennas.num_tx,
            Scheme::Golden => 4,
        }
    }

    fn random_symbols(&self, rng: &mut ChaCha8Rng) -> Vec<Complex<i64>> {
        let side = self.alphabet.side() as i64;
        (0..self.symbols_per_use())
            .map(|_| {
                let re = self.alphabet.unshift(rng.random_range(0..side));
                let im = self.alphabet.unshift(rng.random_range(0..side));
                Complex::new(re, im)
            })
            .collect()
    }

    /// Sends `symbols` through a fresh channel and reduces the result.
    fn transmit(&self, symbols: &[Complex<i64>], rng: &mut ChaCha8Rng) -> Result<TriangularSystem> {
        let Antennas { num_tx, num_rx } = self.antennas;
        let h = channel_sample(num_rx, num_tx, rng);
        let s: Vec<Complex64> = symbols
            .iter()
            .map(|c| Complex64::new(c.re as f64, c.im as f64))
            .collect();
        let system = match self.scheme {
            Scheme::Sm => {
                let w = noise_sample(2 * num_rx, self.sigma2, rng);
                let y: Vec<Complex64> = h
                    .apply(&s)
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| v + Complex64::new(w[i], w[i + num_rx]))
                    .collect();
                realify(&h, &y)?
            }
            Scheme::Golden => {
                let x = self.golden.codeword(&s);
                let t = self.golden.temporal_length();
                let w = noise_sample(2 * num_rx * t, self.sigma2, rng);
                let noise = DMatrix::from_fn(num_rx, t, |i, j| {
                    let k = j * num_rx + i;
                    Complex64::new(w[k], w[k + num_rx * t])
                });
                let y = h.entries() * x + noise;
                stbc_flatten(&h, self.golden, &y)?
            }
        };
        qr_reduce(&system.with_noise_var(self.sigma2))
    }

    fn rng(&self, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(split_seed(self.seed, self.stream, trial))
    }

    fn uncoded_trial(&self, trial: u64) -> Vec<Tally> {
        let mut rng = self.rng(trial);
        let sent = self.random_symbols(&mut rng);
        let skip_all = || {
            vec![
                Tally {
                    skipped: 1,
                    ..Tally::default()
                };
                self.specs.len()
            ]
        };
        let Ok(system) = self.transmit(&sent, &mut rng) else {
            return skip_all();
        };
        let sent_bits = qam_demap_bits(&sent, self.alphabet);
        self.specs
            .iter()
            .map(|spec| match spec.decide(&system, self.alphabet, self.limits) {
                Ok((point, stats)) => {
                    let decided = real_to_symbols(&point);
                    let symbol_errors = decided.iter().zip(&sent).filter(|(a, b)| a != b).count();
                    let clamped: Vec<Complex<i64>> = decided
                        .iter()
                        .map(|c| {
                            Complex::new(
                                self.alphabet.nearest(c.re as f64),
                                self.alphabet.nearest(c.im as f64),
                            )
                        })
                        .collect();
                    let bits = qam_demap_bits(&clamped, self.alphabet);
                    let bit_errors = bits.iter().zip(&sent_bits).filter(|(a, b)| a != b).count();
                    Tally {
                        trials: 1,
                        detections: 1,
                        symbols: sent.len() as u64,
                        symbol_errors: symbol_errors as u64,
                        bits: sent_bits.len() as u64,
                        bit_errors: bit_errors as u64,
                        mults: stats.real_mults,
                        nodes: stats.nodes_visited,
                        ..Tally::default()
                    }
                }
                Err(_) => Tally {
                    skipped: 1,
                    ..Tally::default()
                },
            })
            .collect()
    }

    fn coded_trial(&self, trial: u64) -> Vec<Tally> {
        let code = ConvCode::default();
        let mut rng = self.rng(trial);
        let info: Vec<u8> = (0..self.frame_bits).map(|_| rng.random_range(0..2u8)).collect();
        let mut coded = conv_encode(&info, &code);
        if let Some(il) = self.interleaver {
            coded = il.interleave(&coded).expect("interleaver sized to the codeword");
        }
        let coded_len = coded.len();
        let per_use = self.symbols_per_use() * self.alphabet.bits_per_symbol() as usize;
        while coded.len() % per_use != 0 {
            coded.push(rng.random_range(0..2u8));
        }

        let k = self.specs.len();
        let mut tallies = vec![
            Tally {
                coded: true,
                ..Tally::default()
            };
            k
        ];
        let mut llrs: Vec<Vec<f64>> = vec![Vec::with_capacity(coded.len()); k];
        let mut failed = vec![false; k];
        let noise_divisor = 2.0 * self.sigma2;
        for chunk in coded.chunks(per_use) {
            let sent = qam_map(chunk, self.alphabet).expect("chunk holds whole symbols");
            let Ok(system) = self.transmit(&sent, &mut rng) else {
                failed.iter_mut().for_each(|f| *f = true);
                continue;
            };
            for (d, spec) in self.specs.iter().enumerate() {
                if failed[d] {
                    continue;
                }
                let soft = spec
                    .candidates(&system, self.alphabet, self.limits)
                    .and_then(|list| {
                        let llr = llr_maxlog(&list, self.alphabet, noise_divisor, DEFAULT_LLR_MAX)?;
                        let llr = match spec.llr_bits {
                            Some(m) => llr_quantize(&llr, m)?,
                            None => llr,
                        };
                        Ok((list, llr))
                    });
                match soft {
                    Ok((list, llr)) => {
                        let best = real_to_symbols(&list.entries[0].point);
                        let t = &mut tallies[d];
                        t.detections += 1;
                        t.symbols += sent.len() as u64;
                        t.symbol_errors += best.iter().zip(&sent).filter(|(a, b)| a != b).count() as u64;
                        t.mults += list.stats.real_mults;
                        t.nodes += list.stats.nodes_visited;
                        llrs[d].extend(llr.values);
                    }
                    Err(_) => failed[d] = true,
                }
            }
        }
        for d in 0..k {
            if failed[d] {
                tallies[d] = Tally {
                    skipped: 1,
                    coded: true,
                    ..Tally::default()
                };
                continue;
            }
            let mut soft = std::mem::take(&mut llrs[d]);
            soft.truncate(coded_len);
            if let Some(il) = self.interleaver {
                soft = il.deinterleave(&soft).expect("interleaver sized to the codeword");
            }
            let decoded = viterbi_decode_soft(&soft, &code).expect("codeword length is consistent");
            let t = &mut tallies[d];
            t.trials = 1;
            t.bits = info.len() as u64;
            t.bit_errors = decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
        }
        tallies
    }
}

/// Runs every (antennas, constellation, SNR, decoder) combination.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_experiment_with_progress(config, &mut |_| {})
}

/// As [`run_experiment`], reporting each finished row.
pub fn run_experiment_with_progress(
    config: &ExperimentConfig,
    progress: &mut dyn FnMut(&ResultRow),
) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    run_all(config, &pool, progress)
}

fn run_all(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    progress: &mut dyn FnMut(&ResultRow),
) -> Result<Vec<ResultRow>> {
    let snrs = config.snr_points()?;
    let specs = config.decoder_specs()?;
    let golden = StbcGenerator::golden();
    let code = ConvCode::default();
    let mut rows = Vec::new();
    let mut group = 0u64;
    for antennas in config.antenna_setups()? {
        for alphabet in config.constellations()? {
            let suffix = format!("@{antennas}-{}qam", alphabet.size());
            let interleaver = config.interleave.then(|| {
                Interleaver::random(
                    code.coded_len(config.frame_bits),
                    split_seed(config.seed, INTERLEAVER_STREAM, group),
                )
            });
            for (s, &snr_db) in snrs.iter().enumerate() {
                let symbol_energy = alphabet.average_energy();
                let sigma2 = if config.coded {
                    ebn0_to_sigma(snr_db, CODE_RATE, alphabet.bits_per_symbol(), antennas.num_tx, symbol_energy)
                } else {
                    snr_to_sigma(snr_db, antennas.num_tx, symbol_energy)
                };
                let point = Point {
                    antennas,
                    alphabet: &alphabet,
                    scheme: config.scheme,
                    golden: &golden,
                    sigma2,
                    specs: &specs,
                    seed: config.seed,
                    stream: (group << 32) | s as u64,
                    limits: SearchLimits::default(),
                    frame_bits: config.frame_bits,
                    interleaver: interleaver.as_ref(),
                };
                let totals = run_point(&point, config, pool);
                for (spec, t) in specs.iter().zip(&totals) {
                    let row = ResultRow {
                        decoder: format!("{}{suffix}", spec.label),
                        snr_db,
                        trials: t.trials,
                        skipped: t.skipped,
                        error_events: t.error_events(),
                        ser: ratio(t.symbol_errors, t.symbols),
                        ber: ratio(t.bit_errors, t.bits),
                        mean_mults: ratio(t.mults, t.detections),
                        mean_nodes: ratio(t.nodes, t.detections),
                        seed: config.seed,
                    };
                    progress(&row);
                    rows.push(row);
                }
            }
            group += 1;
        }
    }
    Ok(rows)
}

fn run_point(point: &Point<'_>, config: &ExperimentConfig, pool: &rayon::ThreadPool) -> Vec<Tally> {
    let chunk = if config.coded { CODED_CHUNK } else { UNCODED_CHUNK };
    let mut totals = vec![
        Tally {
            coded: config.coded,
            ..Tally::default()
        };
        point.specs.len()
    ];
    let mut start = 0;
    while start < config.trials {
        let end = (start + chunk).min(config.trials);
        let outcomes: Vec<Vec<Tally>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|t| {
                    if config.coded {
                        point.coded_trial(t)
                    } else {
                        point.uncoded_trial(t)
                    }
                })
                .collect()
        });
        for outcome in &outcomes {
            for (total, t) in totals.iter_mut().zip(outcome) {
                total.add(t);
            }
        }
        start = end;
        if config.target_errors > 0
            && totals.iter().all(|t| t.error_events() >= config.target_errors)
        {
            break;
        }
    }
    totals
}
