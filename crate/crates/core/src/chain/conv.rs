use crate::error::{Error, Result};

/// Rate-1/2 feedforward convolutional code.
///
/// The shift register holds the current input in its most significant bit
/// followed by the `memory` previous inputs; each generator, read in
/// binary, selects the taps of one output bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCode {
    generators: [u32; 2],
    memory: u32,
}

impl Default for ConvCode {
    /// The (7, 5) octal code with two delay elements.
    fn default() -> Self {
        Self {
            generators: [0o7, 0o5],
            memory: 2,
        }
    }
}

impl ConvCode {
    pub fn new(generators: [u32; 2], memory: u32) -> Result<Self> {
        if !(1..=16).contains(&memory) {
            return Err(Error::InvalidParameter(format!(
                "code memory must be in 1..=16, got {memory}"
            )));
        }
        let width = memory + 1;
        for g in generators {
            if g == 0 || g >> width != 0 {
                return Err(Error::InvalidParameter(format!(
                    "generator {g:o} does not fit a register of {width} taps"
                )));
            }
        }
        Ok(Self { generators, memory })
    }

    pub fn generators(&self) -> [u32; 2] {
        self.generators
    }

    pub fn memory(&self) -> u32 {
        self.memory
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// Coded length of a zero-tailed message of `info_len` bits.
    pub fn coded_len(&self, info_len: usize) -> usize {
        2 * (info_len + self.memory as usize)
    }

    /// Output pair and next state for `input` leaving `state`.
    #[inline]
    fn step(&self, state: usize, input: u8) -> ([u8; 2], usize) {
        let register = ((input as usize) << self.memory) | state;
        let out = self.generators.map(|g| ((register as u32 & g).count_ones() & 1) as u8);
        (out, register >> 1)
    }
}

/// Encodes `bits` and flushes the register with `memory` zeros.
pub fn conv_encode(bits: &[u8], code: &ConvCode) -> Vec<u8> {
    let mut out = Vec::with_capacity(code.coded_len(bits.len()));
    let mut state = 0;
    let tail = std::iter::repeat_n(0u8, code.memory as usize);
    for b in bits.iter().copied().chain(tail) {
        let (pair, next) = code.step(state, b & 1);
        out.extend_from_slice(&pair);
        state = next;
    }
    out
}

/// Soft-input Viterbi decoding of a zero-tailed codeword.
///
/// Maximizes `Σ llr_j (2 c_j - 1)` over trellis paths starting and ending
/// in the zero state (positive LLRs favour `1`). When both predecessors of
/// a state tie, the one whose shifted-out bit is zero wins.
pub fn viterbi_decode_soft(llrs: &[f64], code: &ConvCode) -> Result<Vec<u8>> {
    let m = code.memory as usize;
    if llrs.len() % 2 != 0 || llrs.len() < 2 * m {
        return Err(Error::DimensionMismatch(format!(
            "{} LLRs do not form a zero-tailed rate-1/2 codeword with memory {m}",
            llrs.len()
        )));
    }
    let steps = llrs.len() / 2;
    let states = code.num_states();
    let mut metric = vec![f64::NEG_INFINITY; states];
    metric[0] = 0.0;
    let mut next_metric = vec![f64::NEG_INFINITY; states];
    // decisions[t][s]: shifted-out bit of the survivor entering s at step t
    let mut decisions = vec![0u8; steps * states];
    for t in 0..steps {
        let (l0, l1) = (llrs[2 * t], llrs[2 * t + 1]);
        next_metric.fill(f64::NEG_INFINITY);
        for next in 0..states {
            let input = (next >> (m - 1)) as u8;
            let mut best = f64::NEG_INFINITY;
            let mut choice = 0u8;
            for low in 0..2usize {
                let prev = ((next << 1) & (states - 1)) | low;
                if metric[prev] == f64::NEG_INFINITY {
                    continue;
                }
                let (out, to) = code.step(prev, input);
                debug_assert_eq!(to, next);
                let branch = l0 * (2.0 * out[0] as f64 - 1.0) + l1 * (2.0 * out[1] as f64 - 1.0);
                let cand = metric[prev] + branch;
                if cand > best {
                    best = cand;
                    choice = low as u8;
                }
            }
            next_metric[next] = best;
            decisions[t * states + next] = choice;
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }
    let mut state = 0usize;
    let mut inputs = vec![0u8; steps];
    for t in (0..steps).rev() {
        inputs[t] = (state >> (m - 1)) as u8;
        let low = decisions[t * states + state] as usize;
        state = ((state << 1) & (states - 1)) | low;
    }
    inputs.truncate(steps - m);
    Ok(inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shift_register_trace() {
        let out = conv_encode(&[1, 0, 0], &ConvCode::default());
        assert_eq!(&out[..6], &[1, 1, 1, 0, 1, 1]);
        assert_eq!(out.len(), 10);
        assert!(out[6..].iter().all(|&b| b == 0));
    }

    #[test]
    fn all_zero_message() {
        assert!(conv_encode(&[0; 20], &ConvCode::default()).iter().all(|&b| b == 0));
    }

    #[test]
    fn rejects_bad_codes_and_lengths() {
        assert!(ConvCode::new([0o17, 0o5], 2).is_err());
        assert!(ConvCode::new([0, 0o5], 2).is_err());
        assert!(ConvCode::new([0o15, 0o17], 3).is_ok());
        assert!(viterbi_decode_soft(&[1.0; 3], &ConvCode::default()).is_err());
    }

    #[test]
    fn noiseless_llrs_round_trip() {
        let code = ConvCode::default();
        let msg = [1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1];
        let llrs: Vec<f64> = conv_encode(&msg, &code)
            .iter()
            .map(|&b| if b == 1 { 25.0 } else { -25.0 })
            .collect();
        assert_eq!(viterbi_decode_soft(&llrs, &code).unwrap(), msg);
    }

    #[test]
    fn corrects_a_single_hard_error() {
        let code = ConvCode::default();
        let msg = [1, 1, 0, 1, 0, 0, 1, 0];
        let mut llrs: Vec<f64> = conv_encode(&msg, &code)
            .iter()
            .map(|&b| if b == 1 { 1.0 } else { -1.0 })
            .collect();
        llrs[5] = -llrs[5];
        assert_eq!(viterbi_decode_soft(&llrs, &code).unwrap(), msg);
    }

    #[test]
    fn all_zero_llrs_decode_to_zeros() {
        let code = ConvCode::default();
        assert_eq!(viterbi_decode_soft(&[0.0; 20], &code).unwrap(), vec![0; 8]);
    }

    /// Minimum Hamming distance decoding by enumerating every message.
    fn hard_oracle(received: &[u8], info_len: usize, code: &ConvCode) -> u32 {
        (0..1u32 << info_len)
            .map(|m| {
                let msg: Vec<u8> = (0..info_len).map(|i| ((m >> i) & 1) as u8).collect();
                conv_encode(&msg, code)
                    .iter()
                    .zip(received)
                    .filter(|(a, b)| a != b)
                    .count() as u32
            })
            .min()
            .unwrap()
    }

    proptest! {
        #[test]
        fn encoding_is_linear(a in proptest::collection::vec(0u8..2, 1..40), seed in any::<u64>()) {
            let code = ConvCode::default();
            let b: Vec<u8> = a.iter().enumerate().map(|(i, _)| ((seed >> (i % 64)) & 1) as u8).collect();
            let xor: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let lhs = conv_encode(&xor, &code);
            let rhs: Vec<u8> = conv_encode(&a, &code).iter().zip(conv_encode(&b, &code)).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn random_messages_round_trip(msg in proptest::collection::vec(0u8..2, 0..200)) {
            let code = ConvCode::default();
            let llrs: Vec<f64> = conv_encode(&msg, &code).iter().map(|&b| 2.0 * b as f64 - 1.0).collect();
            prop_assert_eq!(viterbi_decode_soft(&llrs, &code).unwrap(), msg);
        }

        #[test]
        fn unit_llrs_give_hamming_decoding(
            msg in proptest::collection::vec(0u8..2, 8),
            flips in proptest::collection::vec(0usize..20, 0..4),
        ) {
            let code = ConvCode::default();
            let mut received = conv_encode(&msg, &code);
            for f in flips {
                received[f] ^= 1;
            }
            let llrs: Vec<f64> = received.iter().map(|&b| 2.0 * b as f64 - 1.0).collect();
            let decoded = viterbi_decode_soft(&llrs, &code).unwrap();
            let distance = conv_encode(&decoded, &code)
                .iter()
                .zip(&received)
                .filter(|(a, b)| a != b)
                .count() as u32;
            prop_assert_eq!(distance, hard_oracle(&received, 8, &code));
        }
    }
}
