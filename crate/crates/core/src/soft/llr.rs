use super::CandidateList;
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Default LLR saturation, in natural-log units.
pub const DEFAULT_LLR_MAX: f64 = 25.0;

/// Bit reliabilities of one detected vector; positive favours bit `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector {
    pub values: Vec<f64>,
    pub saturation: f64,
}

impl LlrVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Bits decided by sign; zero decides `0`.
    pub fn hard_bits(&self) -> Vec<u8> {
        self.values.iter().map(|&v| u8::from(v > 0.0)).collect()
    }
}

/// Gray bits of a realified point `[Re s; Im s]`, symbol by symbol with the
/// in-phase amplitude first.
pub fn point_bits(point: &[i64], alphabet: &Constellation) -> Vec<u8> {
    assert!(point.len() % 2 == 0, "a realified point has even length");
    let k = point.len() / 2;
    let mut bits = Vec::with_capacity(point.len() * alphabet.bits_per_dim() as usize);
    for j in 0..k {
        alphabet.amplitude_bits(point[j], &mut bits);
        alphabet.amplitude_bits(point[j + k], &mut bits);
    }
    bits
}

fn check(list: &CandidateList, sigma2: f64, saturation: f64) -> Result<()> {
    if list.is_empty() {
        return Err(Error::EmptyList);
    }
    if !(sigma2 > 0.0) || !(saturation > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "LLRs need σ² > 0 and a positive saturation, got {sigma2} and {saturation}"
        )));
    }
    Ok(())
}

/// Max-log LLRs: `(min cost with bit 0 - min cost with bit 1) / σ²`.
///
/// `sigma2` divides the squared distances, so it is the variance of the
/// complex noise (twice the per-real-dimension variance) when costs are
/// Euclidean distances of the realified model. A bit whose value is the
/// same in every candidate gets `±saturation`.
pub fn llr_maxlog(
    list: &CandidateList,
    alphabet: &Constellation,
    sigma2: f64,
    saturation: f64,
) -> Result<LlrVector> {
    check(list, sigma2, saturation)?;
    let nbits = point_bits(&list.entries[0].point, alphabet).len();
    let mut best = vec![[f64::INFINITY; 2]; nbits];
    for entry in &list.entries {
        for (slot, &b) in best.iter_mut().zip(&point_bits(&entry.point, alphabet)) {
            let s = &mut slot[b as usize];
            *s = s.min(entry.raw_cost);
        }
    }
    let values = best
        .iter()
        .map(|[zero, one]| clip((zero - one) / sigma2, saturation))
        .collect();
    Ok(LlrVector { values, saturation })
}

/// LLRs `log(Σ_{b=1} e^{-d/σ²} / Σ_{b=0} e^{-d/σ²})` over the list,
/// evaluated with log-sum-exp. Exact when the list holds every point.
pub fn llr_exact(
    list: &CandidateList,
    alphabet: &Constellation,
    sigma2: f64,
    saturation: f64,
) -> Result<LlrVector> {
    check(list, sigma2, saturation)?;
    let bits: Vec<Vec<u8>> = list
        .entries
        .iter()
        .map(|e| point_bits(&e.point, alphabet))
        .collect();
    let nbits = bits[0].len();
    let values = (0..nbits)
        .map(|i| {
            let mut terms: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
            for (entry, b) in list.entries.iter().zip(&bits) {
                terms[b[i] as usize].push(-entry.raw_cost / sigma2);
            }
            clip(log_sum_exp(&terms[1]) - log_sum_exp(&terms[0]), saturation)
        })
        .collect();
    Ok(LlrVector { values, saturation })
}

/// `log Σ e^{t}`, `-∞` for an empty sum.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn clip(v: f64, saturation: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-saturation, saturation)
    }
}

/// Uniform quantizer of `[-L, L]` onto `2^m - 1` levels `kΔ`,
/// `|k| ≤ 2^{m-1} - 1`, zero included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    bits: u32,
    saturation: f64,
}

impl Quantizer {
    pub fn new(bits: u32, saturation: f64) -> Result<Self> {
        if !(2..=31).contains(&bits) {
            return Err(Error::InvalidParameter(format!(
                "LLR quantization needs between 2 and 31 bits, got {bits}"
            )));
        }
        if !(saturation > 0.0) || !saturation.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "saturation must be positive, got {saturation}"
            )));
        }
        Ok(Self { bits, saturation })
    }

    /// Largest level index, `2^{m-1} - 1`.
    pub fn max_index(&self) -> i32 {
        (1 << (self.bits - 1)) - 1
    }

    pub fn step(&self) -> f64 {
        self.saturation / self.max_index() as f64
    }

    /// Index of the nearest level.
    pub fn index(&self, v: f64) -> i32 {
        let k = (v.clamp(-self.saturation, self.saturation) / self.step()).round() as i32;
        k.clamp(-self.max_index(), self.max_index())
    }

    /// Value of the nearest level.
    pub fn quantize(&self, v: f64) -> f64 {
        self.index(v) as f64 * self.step()
    }
}

/// Quantizes every LLR to `m` bits over its saturation range.
pub fn llr_quantize(llr: &LlrVector, m: u32) -> Result<LlrVector> {
    let q = Quantizer::new(m, llr.saturation)?;
    Ok(LlrVector {
        values: llr.values.iter().map(|&v| q.quantize(v)).collect(),
        saturation: llr.saturation,
    })
}
