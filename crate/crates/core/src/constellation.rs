//! Square q-QAM alphabets in integer coordinates.
//!
//! Each real dimension carries one of the `√q` odd amplitudes
//! `{-(√q-1), …, -1, +1, …, √q-1}`. Decoders work in shifted coordinates
//! `u = (x + √q - 1) / 2 ∈ {0, …, √q-1}`, and every level `u` carries the
//! reflected-Gray label `u ^ (u >> 1)`, written most significant bit first.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constellation {
    q: u32,
    side: u32,
    bits_per_dim: u32,
    /// `level_of_label[label]` inverts the Gray map.
    level_of_label: Vec<u32>,
}

impl Constellation {
    /// Builds a square q-QAM. `q` must be an even power of two, at least 4.
    pub fn new(q: u32) -> Result<Self> {
        let side = (q as f64).sqrt().round() as u32;
        if q < 4 || side * side != q || !side.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "q = {q} is not a square QAM size (4, 16, 64, …)"
            )));
        }
        let bits_per_dim = side.trailing_zeros();
        let mut level_of_label = vec![0; side as usize];
        for level in 0..side {
            level_of_label[gray(level) as usize] = level;
        }
        Ok(Self {
            q,
            side,
            bits_per_dim,
            level_of_label,
        })
    }

    pub fn qam4() -> Self {
        Self::new(4).unwrap()
    }

    pub fn qam16() -> Self {
        Self::new(16).unwrap()
    }

    pub fn qam64() -> Self {
        Self::new(64).unwrap()
    }

    /// Number of complex points `q`.
    pub fn size(&self) -> u32 {
        self.q
    }

    /// Number of amplitudes per real dimension, `√q`.
    pub fn side(&self) -> u32 {
        self.side
    }

    /// Largest shifted level, `√q - 1`.
    pub fn max_level(&self) -> i64 {
        self.side as i64 - 1
    }

    /// `B = log2(q)`.
    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.bits_per_dim
    }

    /// `B / 2`.
    pub fn bits_per_dim(&self) -> u32 {
        self.bits_per_dim
    }

    /// Amplitudes in ascending order.
    pub fn amplitudes(&self) -> Vec<i64> {
        (0..self.side as i64).map(|u| self.unshift(u)).collect()
    }

    pub fn contains(&self, x: i64) -> bool {
        self.shift(x).is_some()
    }

    /// `u = (x + √q - 1) / 2`, or `None` when `x` is not an amplitude.
    pub fn shift(&self, x: i64) -> Option<i64> {
        let t = x + self.max_level();
        if t.rem_euclid(2) != 0 {
            return None;
        }
        let u = t / 2;
        (0..=self.max_level()).contains(&u).then_some(u)
    }

    /// `x = 2u - (√q - 1)`. Defined for any integer `u`, so points of the
    /// unbounded shifted lattice map back to odd integers.
    pub fn unshift(&self, u: i64) -> i64 {
        2 * u - self.max_level()
    }

    /// Nearest amplitude to a real value; ties round away from zero in the
    /// shifted coordinate.
    pub fn nearest(&self, value: f64) -> i64 {
        let u = ((value + self.max_level() as f64) / 2.0).round();
        let u = u.clamp(0.0, self.max_level() as f64) as i64;
        self.unshift(u)
    }

    /// Mean energy of a complex symbol, `2(q - 1) / 3`.
    pub fn average_energy(&self) -> f64 {
        2.0 * (self.q as f64 - 1.0) / 3.0
    }

    /// Gray label of a shifted level.
    pub fn label(&self, level: i64) -> u32 {
        gray(level as u32)
    }

    /// Shifted level carrying a Gray label.
    pub fn level_of(&self, label: u32) -> i64 {
        self.level_of_label[label as usize] as i64
    }

    /// Bits (MSB first) of one real amplitude.
    pub fn amplitude_bits(&self, x: i64, out: &mut Vec<u8>) {
        let level = self
            .shift(x)
            .unwrap_or_else(|| panic!("{x} is not a {}-QAM amplitude", self.q));
        let label = self.label(level);
        for b in (0..self.bits_per_dim).rev() {
            out.push(((label >> b) & 1) as u8);
        }
    }

    /// Amplitude carried by `bits_per_dim` bits (MSB first).
    pub fn amplitude_from_bits(&self, bits: &[u8]) -> i64 {
        debug_assert_eq!(bits.len(), self.bits_per_dim as usize);
        let label = bits.iter().fold(0u32, |acc, &b| (acc << 1) | (b & 1) as u32);
        self.unshift(self.level_of(label))
    }
}

fn gray(v: u32) -> u32 {
    v ^ (v >> 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_square_sizes() {
        for q in [0, 1, 2, 8, 9, 32, 36] {
            assert!(Constellation::new(q).is_err(), "q = {q}");
        }
    }

    #[test]
    fn shift_is_a_bijection() {
        for q in [4, 16, 64, 256] {
            let c = Constellation::new(q).unwrap();
            let amps = c.amplitudes();
            assert_eq!(amps.len() as u32, c.side());
            for (u, &x) in amps.iter().enumerate() {
                assert_eq!(c.shift(x), Some(u as i64));
                assert_eq!(c.unshift(u as i64), x);
            }
            assert_eq!(c.shift(0), None);
            assert_eq!(c.shift(c.max_level() + 2), None);
        }
    }

    #[test]
    fn sixteen_qam_gray_table() {
        let c = Constellation::qam16();
        let table: Vec<(i64, Vec<u8>)> = c
            .amplitudes()
            .into_iter()
            .map(|x| {
                let mut bits = Vec::new();
                c.amplitude_bits(x, &mut bits);
                (x, bits)
            })
            .collect();
        assert_eq!(
            table,
            vec![
                (-3, vec![0, 0]),
                (-1, vec![0, 1]),
                (1, vec![1, 1]),
                (3, vec![1, 0]),
            ]
        );
    }

    #[test]
    fn adjacent_levels_differ_in_one_bit() {
        for q in [4, 16, 64, 256] {
            let c = Constellation::new(q).unwrap();
            for u in 1..c.side() as i64 {
                assert_eq!((c.label(u) ^ c.label(u - 1)).count_ones(), 1);
            }
        }
    }

    #[test]
    fn nearest_clamps_to_the_alphabet() {
        let c = Constellation::qam16();
        assert_eq!(c.nearest(5.0), 3);
        assert_eq!(c.nearest(-40.0), -3);
        assert_eq!(c.nearest(0.2), 1);
        assert_eq!(c.nearest(-0.2), -1);
        assert_eq!(c.nearest(1.9), 1);
        assert_eq!(c.nearest(2.1), 3);
    }

    #[test]
    fn average_energy_matches_enumeration() {
        for q in [4, 16, 64] {
            let c = Constellation::new(q).unwrap();
            let amps = c.amplitudes();
            let e: f64 = amps
                .iter()
                .flat_map(|&a| amps.iter().map(move |&b| (a * a + b * b) as f64))
                .sum::<f64>()
                / q as f64;
            assert!((e - c.average_energy()).abs() < 1e-12);
        }
    }
}
