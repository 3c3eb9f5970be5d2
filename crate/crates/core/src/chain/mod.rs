//! Coded transmission chain: convolutional code, Gray QAM mapping, Rayleigh
//! fading, Gaussian noise and Eb/N0 bookkeeping.
//!
//! Decoders work in integer constellation coordinates (odd amplitudes), so
//! signal energies are those of the unnormalized alphabet and noise
//! variances are scaled to match.

mod conv;
mod mapping;
mod random;

pub use conv::{conv_encode, viterbi_decode_soft, ConvCode};
pub use mapping::{qam_demap_bits, qam_map, symbols_to_real, real_to_symbols};
pub use random::{
    channel_sample, ebn0_to_sigma, noise_sample, snr_to_sigma, split_seed, Interleaver,
};
