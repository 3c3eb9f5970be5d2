use num_complex::Complex;

use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Gray-maps bits onto QAM symbols: each group of `log2 q` bits gives the
/// in-phase amplitude from its first half and the quadrature amplitude from
/// its second half.
pub fn qam_map(bits: &[u8], alphabet: &Constellation) -> Result<Vec<Complex<i64>>> {
    let per_symbol = alphabet.bits_per_symbol() as usize;
    if bits.len() % per_symbol != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} bits do not fill {}-bit symbols",
            bits.len(),
            per_symbol
        )));
    }
    let half = per_symbol / 2;
    Ok(bits
        .chunks(per_symbol)
        .map(|c| {
            Complex::new(
                alphabet.amplitude_from_bits(&c[..half]),
                alphabet.amplitude_from_bits(&c[half..]),
            )
        })
        .collect())
}

/// Inverse of [`qam_map`].
pub fn qam_demap_bits(symbols: &[Complex<i64>], alphabet: &Constellation) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * alphabet.bits_per_symbol() as usize);
    for s in symbols {
        alphabet.amplitude_bits(s.re, &mut bits);
        alphabet.amplitude_bits(s.im, &mut bits);
    }
    bits
}

/// `[Re s; Im s]`.
pub fn symbols_to_real(symbols: &[Complex<i64>]) -> Vec<i64> {
    symbols
        .iter()
        .map(|s| s.re)
        .chain(symbols.iter().map(|s| s.im))
        .collect()
}

/// Inverse of [`symbols_to_real`].
pub fn real_to_symbols(x: &[i64]) -> Vec<Complex<i64>> {
    let k = x.len() / 2;
    (0..k).map(|j| Complex::new(x[j], x[j + k])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soft::point_bits;

    #[test]
    fn qam4_table() {
        let c4 = Constellation::qam4();
        assert_eq!(qam_map(&[0, 0], &c4).unwrap(), vec![Complex::new(-1, -1)]);
        assert_eq!(qam_map(&[1, 1], &c4).unwrap(), vec![Complex::new(1, 1)]);
        assert!(qam_map(&[1], &c4).is_err());
    }

    #[test]
    fn qam16_per_dimension_table() {
        let c16 = Constellation::qam16();
        let amps: Vec<i64> = [[0, 0], [0, 1], [1, 1], [1, 0]]
            .iter()
            .map(|b| qam_map(&[b[0], b[1], 0, 0], &c16).unwrap()[0].re)
            .collect();
        assert_eq!(amps, vec![-3, -1, 1, 3]);
    }

    #[test]
    fn exhaustive_round_trip() {
        for c in [Constellation::qam4(), Constellation::qam16(), Constellation::qam64()] {
            let b = c.bits_per_symbol();
            for pattern in 0..1u32 << b {
                let bits: Vec<u8> = (0..b).rev().map(|i| ((pattern >> i) & 1) as u8).collect();
                let s = qam_map(&bits, &c).unwrap();
                assert_eq!(qam_demap_bits(&s, &c), bits);
            }
        }
    }

    #[test]
    fn realified_bits_match_the_soft_bit_order() {
        let c16 = Constellation::qam16();
        let bits: Vec<u8> = (0..16).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
        let s = qam_map(&bits, &c16).unwrap();
        let x = symbols_to_real(&s);
        assert_eq!(point_bits(&x, &c16), bits);
        assert_eq!(real_to_symbols(&x), s);
    }
}
