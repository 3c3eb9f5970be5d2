use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lattice::ComplexChannel;

/// `num_rx × num_tx` Rayleigh channel with i.i.d. `CN(0, 1)` entries
/// (variance 1/2 per real part).
pub fn channel_sample<R: Rng + ?Sized>(num_rx: usize, num_tx: usize, rng: &mut R) -> ComplexChannel {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let entries = DMatrix::from_fn(num_rx, num_tx, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    });
    ComplexChannel::new(entries).expect("nonempty channel")
}

/// `n` i.i.d. `N(0, σ²)` samples.
pub fn noise_sample<R: Rng + ?Sized>(n: usize, sigma2: f64, rng: &mut R) -> DVector<f64> {
    let s = sigma2.sqrt();
    DVector::from_fn(n, |_, _| s * rng.sample::<f64, _>(StandardNormal))
}

/// Per-real-dimension noise variance at a given Eb/N0.
///
/// With `num_tx` antennas each sending symbols of average energy
/// `symbol_energy` through unit-power fading, every receive antenna collects
/// `num_tx · Es` per channel use while `η = rate · bits_per_symbol · num_tx`
/// information bits are carried. Hence `Eb = num_tx · Es / η` per receive
/// antenna and `σ² = N0 / 2 = num_tx · Es / (2 η · Eb/N0)`.
pub fn ebn0_to_sigma(
    ebn0_db: f64,
    rate: f64,
    bits_per_symbol: u32,
    num_tx: usize,
    symbol_energy: f64,
) -> f64 {
    let eta = rate * bits_per_symbol as f64 * num_tx as f64;
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    num_tx as f64 * symbol_energy / (2.0 * eta * ebn0)
}

/// Per-real-dimension noise variance for a receive SNR of
/// `num_tx · Es / N0`, i.e. `σ² = num_tx · Es / (2 · SNR)`.
pub fn snr_to_sigma(snr_db: f64, num_tx: usize, symbol_energy: f64) -> f64 {
    num_tx as f64 * symbol_energy / (2.0 * 10f64.powf(snr_db / 10.0))
}

/// Seed of the `index`-th draw of stream `stream` under `master`: two rounds
/// of the SplitMix64 finalizer over the combined words.
pub fn split_seed(master: u64, stream: u64, index: u64) -> u64 {
    let a = mix(master ^ mix(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    mix(a ^ mix(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed pseudo-random permutation keyed by a seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    /// `out[i] = in[perm[i]]`.
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn random(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.perm.iter().map(|&p| input[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        let mut out = vec![T::default(); input.len()];
        for (&p, &v) in self.perm.iter().zip(input) {
            out[p] = v;
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.perm.len() {
            return Err(Error::DimensionMismatch(format!(
                "interleaver of length {} given {len} items",
                self.perm.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fading_variance_per_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = channel_sample(100, 1000, &mut rng);
        let n = (100 * 1000) as f64;
        let var_re = h.entries().iter().map(|c| c.re * c.re).sum::<f64>() / n;
        let var_im = h.entries().iter().map(|c| c.im * c.im).sum::<f64>() / n;
        assert!((var_re - 0.5).abs() < 0.01, "{var_re}");
        assert!((var_im - 0.5).abs() < 0.01, "{var_im}");
    }

    #[test]
    fn noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = noise_sample(100_000, 0.3, &mut rng);
        let var = w.norm_squared() / 100_000.0;
        assert!((var - 0.3).abs() < 0.006, "{var}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = channel_sample(2, 2, &mut ChaCha8Rng::seed_from_u64(7));
        let b = channel_sample(2, 2, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }

    #[test]
    fn ebn0_hand_computation() {
        // 0 dB, rate 1/2, 4-QAM, 2 antennas, unit energy: η = 2 bits per
        // use, Eb = 2 / 2 = 1, N0 = 1, σ² = 1/2.
        assert!((ebn0_to_sigma(0.0, 0.5, 2, 2, 1.0) - 0.5).abs() < 1e-15);
        // integer 4-QAM has Es = 2
        assert!((ebn0_to_sigma(0.0, 0.5, 2, 2, 2.0) - 1.0).abs() < 1e-15);
        // 10 dB divides by ten
        assert!((ebn0_to_sigma(10.0, 0.5, 2, 2, 1.0) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn snr_hand_computation() {
        assert!((snr_to_sigma(0.0, 2, 1.0) - 1.0).abs() < 1e-15);
        assert!((snr_to_sigma(20.0, 4, 10.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn seeds_differ_across_streams_and_indices() {
        let mut seen = std::collections::HashSet::new();
        for s in 0..10 {
            for i in 0..1000 {
                assert!(seen.insert(split_seed(42, s, i)));
            }
        }
        assert_eq!(split_seed(1, 2, 3), split_seed(1, 2, 3));
    }

    #[test]
    fn interleaver_round_trip() {
        let il = Interleaver::random(50, 9);
        let data: Vec<u32> = (0..50).collect();
        let mixed = il.interleave(&data).unwrap();
        assert_ne!(mixed, data);
        assert_eq!(il.deinterleave(&mixed).unwrap(), data);
        assert!(il.interleave(&data[..3]).is_err());
    }
}
