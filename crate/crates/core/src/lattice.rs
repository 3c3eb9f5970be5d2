//! Real lattice models of MIMO channels and the baseline decoders.
//!
//! A complex system `y = H x + w` is turned into the real system of twice the
//! dimension by stacking real and imaginary parts, optionally after
//! vectorizing a square space-time block code. Householder QR then reduces it
//! to `z = R x + Qᵀw` with `R` upper triangular, which is the substrate of
//! every tree search in this crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Tolerance on `φ†φ = I` accepted by [`StbcGenerator::new`].
pub const UNITARY_TOLERANCE: f64 = 1e-9;

/// Relative tolerance on the diagonal of `R` below which the generator is
/// declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Hard cap on the number of points enumerated by [`brute_force_ml`].
pub const BRUTE_FORCE_BUDGET: u64 = 1 << 24;

/// An `N × M` complex channel (N receive, M transmit antennas).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChannel {
    entries: DMatrix<Complex64>,
}

impl ComplexChannel {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::DimensionMismatch("empty channel matrix".into()));
        }
        Ok(Self { entries })
    }

    /// Builds a channel from row-major entries.
    pub fn from_rows(num_rx: usize, num_tx: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != num_rx * num_tx {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {num_rx}x{num_tx} channel",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(num_rx, num_tx, entries))
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn num_tx(&self) -> usize {
        self.entries.ncols()
    }

    pub fn num_rx(&self) -> usize {
        self.entries.nrows()
    }

    /// `H x` for a complex symbol vector.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let v = &self.entries * DVector::from_column_slice(x);
        v.iter().copied().collect()
    }
}

/// A square linear space-time code, `vec(C) = φ x` with `C` of size `M × T`
/// vectorized column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct StbcGenerator {
    phi: DMatrix<Complex64>,
    temporal_length: usize,
}

impl StbcGenerator {
    pub fn new(phi: DMatrix<Complex64>, temporal_length: usize) -> Result<Self> {
        if temporal_length == 0 || !phi.is_square() || phi.nrows() % temporal_length != 0 {
            return Err(Error::DimensionMismatch(format!(
                "φ is {}x{}, not a square multiple of T = {temporal_length}",
                phi.nrows(),
                phi.ncols()
            )));
        }
        let gram = phi.adjoint() * &phi;
        let identity = DMatrix::<Complex64>::identity(phi.nrows(), phi.ncols());
        let deviation = (gram - identity).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary(deviation));
        }
        Ok(Self {
            phi,
            temporal_length,
        })
    }

    /// The uncoded square code: `C` is filled column by column with symbols.
    pub fn identity(m: usize) -> Self {
        Self::new(DMatrix::identity(m * m, m * m), m).unwrap()
    }

    /// The 2×2 Golden code, normalized to a unitary generator.
    pub fn golden() -> Self {
        let sqrt5 = 5f64.sqrt();
        let theta = (1.0 + sqrt5) / 2.0;
        let theta_bar = (1.0 - sqrt5) / 2.0;
        let i = Complex64::i();
        let alpha = Complex64::new(1.0, 1.0 - theta);
        let alpha_bar = Complex64::new(1.0, 1.0 - theta_bar);
        let zero = Complex64::new(0.0, 0.0);
        // vec(X) = (X11, X21, X12, X22) over the symbols (a, b, c, d).
        #[rustfmt::skip]
        let rows = [
            alpha,     alpha * theta,         zero,          zero,
            zero,      zero,                  i * alpha_bar, i * alpha_bar * theta_bar,
            zero,      zero,                  alpha,         alpha * theta,
            alpha_bar, alpha_bar * theta_bar, zero,          zero,
        ];
        let phi = DMatrix::from_row_slice(4, 4, &rows) / Complex64::new(sqrt5, 0.0);
        Self::new(phi, 2).unwrap()
    }

    pub fn phi(&self) -> &DMatrix<Complex64> {
        &self.phi
    }

    pub fn temporal_length(&self) -> usize {
        self.temporal_length
    }

    /// Number of transmit antennas `M = side / T`.
    pub fn num_tx(&self) -> usize {
        self.phi.nrows() / self.temporal_length
    }

    /// The `M × T` codeword carrying `symbols`.
    pub fn codeword(&self, symbols: &[Complex64]) -> DMatrix<Complex64> {
        let v = &self.phi * DVector::from_column_slice(symbols);
        DMatrix::from_column_slice(self.num_tx(), self.temporal_length, v.as_slice())
    }
}

/// A real system `y = H x + w`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLatticeSystem {
    pub generator: DMatrix<f64>,
    pub received: DVector<f64>,
    /// Noise variance per real dimension (0 when unknown).
    pub noise_var: f64,
}

impl RealLatticeSystem {
    pub fn new(generator: DMatrix<f64>, received: DVector<f64>) -> Result<Self> {
        if generator.nrows() != received.len() {
            return Err(Error::DimensionMismatch(format!(
                "generator has {} rows, received vector has {}",
                generator.nrows(),
                received.len()
            )));
        }
        Ok(Self {
            generator,
            received,
            noise_var: 0.0,
        })
    }

    pub fn with_noise_var(mut self, noise_var: f64) -> Self {
        self.noise_var = noise_var;
        self
    }

    /// Number of real unknowns.
    pub fn dimension(&self) -> usize {
        self.generator.ncols()
    }

    /// `‖y - H x‖²`.
    pub fn metric(&self, x: &[i64]) -> f64 {
        let xv = DVector::from_iterator(x.len(), x.iter().map(|&v| v as f64));
        (&self.received - &self.generator * xv).norm_squared()
    }
}

/// Upper-triangular reduced problem `z = R x + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularSystem {
    r: DMatrix<f64>,
    z: DVector<f64>,
    noise_var: f64,
    /// `‖y‖² - ‖z‖²`, the part of the received energy outside the column
    /// space of the generator. Zero for square systems.
    residual: f64,
}

impl TriangularSystem {
    /// Validates `r` (square, upper triangular, positive diagonal).
    pub fn new(r: DMatrix<f64>, z: DVector<f64>, noise_var: f64) -> Result<Self> {
        let n = r.nrows();
        if !r.is_square() || z.len() != n || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "R is {}x{}, z has {} entries",
                r.nrows(),
                r.ncols(),
                z.len()
            )));
        }
        for j in 0..n {
            for i in j + 1..n {
                if r[(i, j)] != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "R is not upper triangular at ({i}, {j})"
                    )));
                }
            }
            if !(r[(j, j)] > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "R has a non-positive diagonal entry at {j}"
                )));
            }
        }
        Ok(Self {
            r,
            z,
            noise_var,
            residual: 0.0,
        })
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn dimension(&self) -> usize {
        self.z.len()
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn with_noise_var(mut self, noise_var: f64) -> Self {
        self.noise_var = noise_var;
        self
    }

    /// `‖z - R x‖²`.
    pub fn metric(&self, x: &[i64]) -> f64 {
        let n = self.dimension();
        (0..n)
            .map(|i| {
                let rx: f64 = (i..n).map(|j| self.r[(i, j)] * x[j] as f64).sum();
                let d = self.z[i] - rx;
                d * d
            })
            .sum()
    }

    /// Smallest diagonal entry of `RᵀR`, which equals that of `HᵀH`.
    pub fn min_column_energy(&self) -> f64 {
        self.r
            .column_iter()
            .map(|c| c.norm_squared())
            .fold(f64::INFINITY, f64::min)
    }

    /// Rewrites the problem in shifted constellation coordinates
    /// `u = (x + √q - 1)/2`: `R' = 2R`, `z' = z + (√q - 1) R 1`, so that
    /// `‖z - R x‖ = ‖z' - R' u‖`.
    pub fn shifted(&self, alphabet: &Constellation) -> TriangularSystem {
        let offset = alphabet.max_level() as f64;
        let ones = DVector::from_element(self.dimension(), 1.0);
        TriangularSystem {
            z: &self.z + (&self.r * ones) * offset,
            r: &self.r * 2.0,
            noise_var: self.noise_var,
            residual: self.residual,
        }
    }
}

/// `[[Re A, -Im A], [Im A, Re A]]`.
pub fn realify_matrix(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    let mut out = DMatrix::zeros(2 * rows, 2 * cols);
    for i in 0..rows {
        for j in 0..cols {
            let c = a[(i, j)];
            out[(i, j)] = c.re;
            out[(i, j + cols)] = -c.im;
            out[(i + rows, j)] = c.im;
            out[(i + rows, j + cols)] = c.re;
        }
    }
    out
}

/// `[Re v; Im v]`.
pub fn realify_vector(v: &[Complex64]) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Inverse of [`realify_vector`] for integer points.
pub fn complex_symbols(x: &[i64]) -> Vec<(i64, i64)> {
    let k = x.len() / 2;
    (0..k).map(|j| (x[j], x[j + k])).collect()
}

/// Real model of spatial multiplexing.
pub fn realify(channel: &ComplexChannel, received: &[Complex64]) -> Result<RealLatticeSystem> {
    if received.len() != channel.num_rx() {
        return Err(Error::DimensionMismatch(format!(
            "{} received samples for {} receive antennas",
            received.len(),
            channel.num_rx()
        )));
    }
    RealLatticeSystem::new(realify_matrix(channel.entries()), realify_vector(received))
}

/// `blockdiag(H, …, H) φ`, the complex generator of a square STBC.
pub fn stbc_complex_generator(
    channel: &ComplexChannel,
    code: &StbcGenerator,
) -> Result<DMatrix<Complex64>> {
    let m = channel.num_tx();
    let t = code.temporal_length();
    if channel.num_rx() != m {
        return Err(Error::DimensionMismatch(format!(
            "STBC needs a square channel, got {}x{m}",
            channel.num_rx()
        )));
    }
    if t != m || code.phi().nrows() != m * t {
        return Err(Error::DimensionMismatch(format!(
            "φ is {}x{} with T = {t} for M = {m}",
            code.phi().nrows(),
            code.phi().ncols()
        )));
    }
    let mut block = DMatrix::zeros(m * t, m * t);
    for b in 0..t {
        block
            .view_mut((b * m, b * m), (m, m))
            .copy_from(channel.entries());
    }
    Ok(block * code.phi())
}

/// Real model of a square STBC: `vec(Y)` against `realify(blockdiag(H) φ)`,
/// of dimension `n = 2M²`. `received` is the `N × T` matrix `Y`.
pub fn stbc_flatten(
    channel: &ComplexChannel,
    code: &StbcGenerator,
    received: &DMatrix<Complex64>,
) -> Result<RealLatticeSystem> {
    let generator = stbc_complex_generator(channel, code)?;
    if received.shape() != (channel.num_rx(), code.temporal_length()) {
        return Err(Error::DimensionMismatch(format!(
            "received block is {}x{}",
            received.nrows(),
            received.ncols()
        )));
    }
    RealLatticeSystem::new(realify_matrix(&generator), realify_vector(received.as_slice()))
}

/// Householder QR with the sign convention `r_ii > 0`; `z = Qᵀ y`.
///
/// Tall generators (more receive than transmit dimensions) use the thin
/// factorization; the energy of `y` outside the column space is kept in
/// [`TriangularSystem::residual`].
pub fn qr_reduce(system: &RealLatticeSystem) -> Result<TriangularSystem> {
    let (q, r) = householder_qr(&system.generator)?;
    let z = q.transpose() * &system.received;
    let residual = (system.received.norm_squared() - z.norm_squared()).max(0.0);
    let mut reduced = TriangularSystem::new(r, z, system.noise_var)?;
    reduced.residual = residual;
    Ok(reduced)
}

/// Thin QR of a full-column-rank matrix, returning `(Q, R)` with a positive
/// diagonal on `R`.
pub fn householder_qr(h: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (rows, cols) = h.shape();
    if rows < cols || cols == 0 {
        return Err(Error::DimensionMismatch(format!(
            "generator is {rows}x{cols}; need rows ≥ cols > 0"
        )));
    }
    let qr = h.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..cols {
        let d = r[(i, i)];
        if d.abs() <= RANK_TOLERANCE * scale.max(f64::MIN_POSITIVE) || d.abs() == 0.0 {
            return Err(Error::RankDeficient { index: i, value: d });
        }
        if d < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
        for j in 0..i {
            r[(i, j)] = 0.0;
        }
    }
    Ok((q, r))
}

/// Unconstrained least-squares point `ρ` solving `R ρ = z`.
pub fn zf_point(system: &TriangularSystem) -> Vec<f64> {
    let n = system.dimension();
    let (r, z) = (system.r(), system.z());
    let mut rho = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| r[(i, j)] * rho[j]).sum();
        rho[i] = (z[i] - s) / r[(i, i)];
    }
    rho
}

/// ZF decision: `ρ` rounded componentwise (and mapped to the nearest
/// amplitude when an alphabet is given).
pub fn zf_decision(system: &TriangularSystem, alphabet: Option<&Constellation>) -> Vec<i64> {
    zf_point(system)
        .into_iter()
        .map(|v| match alphabet {
            Some(c) => c.nearest(v),
            None => v.round() as i64,
        })
        .collect()
}

/// Babai nearest-plane (ZF-DFE) point: components decided from the last to
/// the first, each rounded after cancelling the already decided ones.
pub fn babai_point(system: &TriangularSystem, alphabet: Option<&Constellation>) -> Vec<i64> {
    let n = system.dimension();
    let (r, z) = (system.r(), system.z());
    let mut x = vec![0i64; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| r[(i, j)] * x[j] as f64).sum();
        let centre = (z[i] - s) / r[(i, i)];
        x[i] = match alphabet {
            Some(c) => c.nearest(centre),
            None => centre.round() as i64,
        };
    }
    x
}

/// Exhaustive ML search over `alphabetⁿ`. Ties go to the lexicographically
/// smallest vector.
pub fn brute_force_ml(system: &TriangularSystem, alphabet: &Constellation) -> Result<(Vec<i64>, f64)> {
    let n = system.dimension();
    let points = (alphabet.side() as f64).powi(n as i32);
    if points > BRUTE_FORCE_BUDGET as f64 {
        return Err(Error::EnumerationBudget {
            points,
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let amplitudes: Vec<f64> = alphabet.amplitudes().iter().map(|&a| a as f64).collect();
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| system.r()[(i, j)]).collect())
        .collect();
    let z: Vec<f64> = system.z().iter().copied().collect();

    // Odometer over component indices; component 0 is most significant, so
    // points are visited in lexicographic order.
    let mut digits = vec![0usize; n];
    let mut best = (vec![0i64; n], f64::INFINITY);
    let mut rx = vec![0.0; n];
    for col in &columns {
        for i in 0..n {
            rx[i] += col[i] * amplitudes[0];
        }
    }
    loop {
        let cost: f64 = z.iter().zip(&rx).map(|(a, b)| (a - b) * (a - b)).sum();
        if cost < best.1 {
            best = (digits.iter().map(|&d| amplitudes[d] as i64).collect(), cost);
        }
        // increment
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            let old = amplitudes[digits[k]];
            if digits[k] + 1 < amplitudes.len() {
                digits[k] += 1;
                let delta = amplitudes[digits[k]] - old;
                for i in 0..n {
                    rx[i] += columns[k][i] * delta;
                }
                break;
            }
            digits[k] = 0;
            let delta = amplitudes[0] - old;
            for i in 0..n {
                rx[i] += columns[k][i] * delta;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn random_triangular(n: usize, rng: &mut ChaCha8Rng) -> TriangularSystem {
        let h = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        qr_reduce(&RealLatticeSystem::new(h, y).unwrap()).unwrap()
    }

    #[test]
    fn realify_scalar_channel() {
        let ch = ComplexChannel::from_rows(1, 1, &[c(1.0, 1.0)]).unwrap();
        let sys = realify(&ch, &[c(2.0, 3.0)]).unwrap();
        assert_eq!(sys.generator, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]));
        assert_eq!(sys.received.as_slice(), &[2.0, 3.0]);
    }

    #[test]
    fn realify_real_identity() {
        let ch = ComplexChannel::new(DMatrix::identity(2, 2)).unwrap();
        let sys = realify(&ch, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(sys.generator, DMatrix::identity(4, 4));
    }

    #[test]
    fn realify_rejects_length_mismatch() {
        let ch = ComplexChannel::new(DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            realify(&ch, &[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn realify_matches_complex_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let h: Vec<Complex64> = (0..4).map(|_| random_complex(&mut rng)).collect();
            let x: Vec<Complex64> = (0..2).map(|_| random_complex(&mut rng)).collect();
            let w: Vec<Complex64> = (0..2).map(|_| random_complex(&mut rng)).collect();
            let ch = ComplexChannel::from_rows(2, 2, &h).unwrap();
            let hx = ch.apply(&x);
            let y: Vec<Complex64> = hx.iter().zip(&w).map(|(a, b)| a + b).collect();
            let real = realify_matrix(ch.entries()) * realify_vector(&x) + realify_vector(&w);
            let expected = realify_vector(&y);
            assert!((real - expected).amax() < 1e-12);
        }
    }

    #[test]
    fn stbc_degenerate_scalar_code() {
        let ch = ComplexChannel::from_rows(1, 1, &[c(1.0, 0.0)]).unwrap();
        let code = StbcGenerator::identity(1);
        let y = DMatrix::from_element(1, 1, c(0.5, -0.5));
        let sys = stbc_flatten(&ch, &code, &y).unwrap();
        assert_eq!(sys.generator, DMatrix::identity(2, 2));
    }

    #[test]
    fn stbc_identity_code_is_block_diagonal_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h: Vec<Complex64> = (0..4).map(|_| random_complex(&mut rng)).collect();
        let ch = ComplexChannel::from_rows(2, 2, &h).unwrap();
        let g = stbc_complex_generator(&ch, &StbcGenerator::identity(2)).unwrap();
        let mut block = DMatrix::zeros(4, 4);
        block.view_mut((0, 0), (2, 2)).copy_from(ch.entries());
        block.view_mut((2, 2), (2, 2)).copy_from(ch.entries());
        assert_eq!(realify_matrix(&g), realify_matrix(&block));
    }

    #[test]
    fn stbc_flatten_matches_vectorized_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let code = StbcGenerator::golden();
        for _ in 0..20 {
            let h: Vec<Complex64> = (0..4).map(|_| random_complex(&mut rng)).collect();
            let ch = ComplexChannel::from_rows(2, 2, &h).unwrap();
            let symbols: Vec<Complex64> = (0..4)
                .map(|_| c(rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64))
                .collect();
            // Y = H C, vectorized column by column.
            let y = ch.entries() * code.codeword(&symbols);
            let sys = stbc_flatten(&ch, &code, &y).unwrap();
            assert_eq!(sys.dimension(), 8);
            let lhs = &sys.generator * realify_vector(&symbols);
            assert!((lhs - &sys.received).norm() < 1e-10);
            // realify is multiplicative: realify(Bφ) = realify(B)·realify(φ)
            let mut block = DMatrix::zeros(4, 4);
            block.view_mut((0, 0), (2, 2)).copy_from(ch.entries());
            block.view_mut((2, 2), (2, 2)).copy_from(ch.entries());
            let split = realify_matrix(&block) * realify_matrix(code.phi());
            assert!((split - &sys.generator).amax() < 1e-12);
        }
    }

    #[test]
    fn stbc_rejects_bad_shapes() {
        let ch = ComplexChannel::new(DMatrix::from_element(2, 3, c(1.0, 0.0))).unwrap();
        assert!(stbc_complex_generator(&ch, &StbcGenerator::identity(2)).is_err());
        let ch = ComplexChannel::new(DMatrix::identity(2, 2)).unwrap();
        assert!(stbc_complex_generator(&ch, &StbcGenerator::identity(3)).is_err());
        let not_unitary = DMatrix::from_element(4, 4, c(1.0, 0.0));
        assert!(matches!(
            StbcGenerator::new(not_unitary, 2),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn qr_of_identity() {
        let sys = RealLatticeSystem::new(DMatrix::identity(3, 3), DVector::from_vec(vec![1.0, -2.0, 0.5]))
            .unwrap();
        let t = qr_reduce(&sys).unwrap();
        assert_eq!(t.r(), &DMatrix::identity(3, 3));
        assert!((t.z() - &sys.received).amax() < 1e-15);
    }

    #[test]
    fn qr_hand_gram_schmidt() {
        // columns (3,4) and (0,5)
        let h = DMatrix::from_column_slice(2, 2, &[3.0, 4.0, 0.0, 5.0]);
        let (q, r) = householder_qr(&h).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[5.0, 4.0, 0.0, 3.0]);
        assert!((&r - expected).amax() < 1e-12);
        assert!((q * r - h).amax() < 1e-12);
    }

    #[test]
    fn qr_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let h = DMatrix::from_fn(8, 8, |_, _| rng.random_range(-1.0..1.0));
            let y = DVector::from_fn(8, |_, _| rng.random_range(-1.0..1.0));
            let (q, r) = householder_qr(&h).unwrap();
            assert!((&q * &r - &h).norm() < 1e-9);
            assert!((q.transpose() * &q - DMatrix::<f64>::identity(8, 8)).amax() < 1e-9);
            let sys = qr_reduce(&RealLatticeSystem::new(h, y.clone()).unwrap()).unwrap();
            assert!((sys.z() - q.transpose() * y).norm() < 1e-12);
            assert!(sys.r().diagonal().iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn qr_rejects_rank_deficiency() {
        let h = DMatrix::from_column_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let sys = RealLatticeSystem::new(h, DVector::zeros(2)).unwrap();
        assert!(matches!(qr_reduce(&sys), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn tall_generator_keeps_out_of_span_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = DMatrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let real = RealLatticeSystem::new(h, y).unwrap();
        let t = qr_reduce(&real).unwrap();
        for x in [[1, -1, 3, 0], [0, 0, 0, 0], [-2, 5, 1, 1]] {
            assert!((real.metric(&x) - (t.metric(&x) + t.residual())).abs() < 1e-9);
        }
    }

    #[test]
    fn zf_point_back_substitution() {
        let t = TriangularSystem::new(DMatrix::identity(2, 2), DVector::from_vec(vec![1.5, -0.2]), 1.0)
            .unwrap();
        assert_eq!(zf_point(&t), vec![1.5, -0.2]);
        let t = TriangularSystem::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]),
            DVector::from_vec(vec![5.0, 2.0]),
            1.0,
        )
        .unwrap();
        let rho = zf_point(&t);
        assert!((rho[0] - 1.5).abs() < 1e-15 && (rho[1] - 2.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let t = random_triangular(6, &mut rng);
            let rho = DVector::from_vec(zf_point(&t));
            assert!((t.r() * rho - t.z()).norm() < 1e-10);
        }
    }

    #[test]
    fn babai_examples() {
        let t = TriangularSystem::new(DMatrix::identity(2, 2), DVector::from_vec(vec![0.4, -0.3]), 1.0)
            .unwrap();
        assert_eq!(babai_point(&t, None), vec![0, 0]);
        let t = TriangularSystem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.0, 1.0]),
            DVector::from_vec(vec![0.0, 0.6]),
            1.0,
        )
        .unwrap();
        assert_eq!(babai_point(&t, None), vec![-1, 1]);
        let t = TriangularSystem::new(DMatrix::identity(1, 1), DVector::from_vec(vec![5.0]), 1.0).unwrap();
        assert_eq!(babai_point(&t, Some(&Constellation::qam16())), vec![3]);
    }

    #[test]
    fn brute_force_zero_noise() {
        let c16 = Constellation::qam16();
        let p = vec![3, -1, 1, -3];
        let z = DVector::from_iterator(4, p.iter().map(|&v| v as f64));
        let t = TriangularSystem::new(DMatrix::identity(4, 4), z, 1.0).unwrap();
        let (x, cost) = brute_force_ml(&t, &c16).unwrap();
        assert_eq!(x, p);
        assert_eq!(cost, 0.0);
    }

    #[test]
    fn brute_force_four_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c4 = Constellation::qam4();
        for _ in 0..50 {
            let t = random_triangular(2, &mut rng);
            let mut best = (vec![], f64::INFINITY);
            for a in [-1, 1] {
                for b in [-1, 1] {
                    let m = t.metric(&[a, b]);
                    if m < best.1 {
                        best = (vec![a, b], m);
                    }
                }
            }
            let (x, cost) = brute_force_ml(&t, &c4).unwrap();
            assert_eq!(x, best.0);
            assert!((cost - best.1).abs() < 1e-12);
        }
    }

    #[test]
    fn brute_force_ties_pick_lexicographic_minimum() {
        // z = 0 with R = I: all four 4-QAM points at cost 2.
        let t = TriangularSystem::new(DMatrix::identity(2, 2), DVector::zeros(2), 1.0).unwrap();
        let (x, cost) = brute_force_ml(&t, &Constellation::qam4()).unwrap();
        assert_eq!(x, vec![-1, -1]);
        assert_eq!(cost, 2.0);
    }

    #[test]
    fn brute_force_budget() {
        let t = TriangularSystem::new(DMatrix::identity(9, 9), DVector::zeros(9), 1.0).unwrap();
        assert!(matches!(
            brute_force_ml(&t, &Constellation::qam64()),
            Err(Error::EnumerationBudget { .. })
        ));
    }

    #[test]
    fn shifted_system_preserves_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c16 = Constellation::qam16();
        let t = random_triangular(4, &mut rng);
        let s = t.shifted(&c16);
        for _ in 0..20 {
            let x: Vec<i64> = (0..4).map(|_| c16.unshift(rng.random_range(0..4))).collect();
            let u: Vec<i64> = x.iter().map(|&v| c16.shift(v).unwrap()).collect();
            assert!((t.metric(&x) - s.metric(&u)).abs() < 1e-9);
        }
    }
}
