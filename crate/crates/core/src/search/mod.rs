//! Hard-decision tree searches over the triangular system.
//!
//! Every decoder walks the same tree: the root decides nothing, a node at
//! depth `d` has fixed the last `d` components `(x_n, …, x_{n-d+1})`, and a
//! leaf is a full point. Decoders differ in which children they generate
//! (sphere bounds, the whole alphabet, a box around the Babai point) and in
//! the order they visit nodes (depth first or cheapest first).
//!
//! Complexity is reported with one shared tariff so decoders are comparable:
//! generating a child at 1-based level `i` costs `n - i + 1` real
//! multiplications (inner product plus the squaring), and computing the
//! sphere bounds of a node costs 2 (the division and the square root).

mod node;
mod sphere;
mod stack;

pub use node::{
    clamp_bounds, level_bounds, node_cost, Bounds, NodeStack, SearchNode, SearchProblem,
};
pub use sphere::{sphere_decode, sphere_decode_with, Enumeration};
pub use stack::{neighbor_stack_decode, sb_stack_decode, stack_decode, SearchRegion};

pub(crate) use sphere::Dfs;
pub(crate) use stack::{validate_bias, BestFirst, Branching, Flow};

use crate::error::{Error, Result};
use crate::lattice::TriangularSystem;

/// Multiplications charged for one sphere-bound evaluation.
pub const BOUND_MULTS: u64 = 2;

/// Default cap on node visits per decode call.
pub const DEFAULT_MAX_VISITS: u64 = 100_000_000;

/// Default cap on the number of nodes held by a stack.
pub const DEFAULT_MAX_STACK: usize = 1_000_000;

/// Deterministic complexity counters of one decode call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Children whose cost was evaluated.
    pub nodes_generated: u64,
    /// Nodes popped from a stack top or descended into by a depth-first step.
    pub nodes_visited: u64,
    /// Real multiplications under the shared tariff.
    pub real_mults: u64,
    /// Radius enlargements after an empty sphere.
    pub restarts: u32,
}

impl SearchStats {
    pub fn merge(&mut self, other: &SearchStats) {
        self.nodes_generated += other.nodes_generated;
        self.nodes_visited += other.nodes_visited;
        self.real_mults += other.real_mults;
        self.restarts += other.restarts;
    }
}

/// Budgets that stop pathological searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_visits: u64,
    pub max_stack: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_visits: DEFAULT_MAX_VISITS,
            max_stack: DEFAULT_MAX_STACK,
        }
    }
}

/// Outcome of a hard-decision decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    /// Decided point, in amplitudes when an alphabet was used.
    pub point: Vec<i64>,
    /// `‖z - R x‖²` of the decided point (never biased).
    pub cost: f64,
    pub stats: SearchStats,
}

/// How the initial squared radius `C²` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusKind {
    /// A constant `C²`.
    Fixed(f64),
    /// `C² = 2 n σ²`.
    NoiseScaled,
    /// `C² = min(2 n σ², min diag(HᵀH))`.
    NoiseAndFading,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusPolicy {
    pub kind: RadiusKind,
    /// Multiplier applied to `C²` when the sphere turns out empty.
    pub growth_factor: f64,
}

impl RadiusPolicy {
    pub fn fixed(c2: f64) -> Self {
        Self::new(RadiusKind::Fixed(c2))
    }

    pub fn noise_scaled() -> Self {
        Self::new(RadiusKind::NoiseScaled)
    }

    pub fn noise_and_fading() -> Self {
        Self::new(RadiusKind::NoiseAndFading)
    }

    pub fn new(kind: RadiusKind) -> Self {
        Self {
            kind,
            growth_factor: 2.0,
        }
    }

    pub fn with_growth(mut self, growth_factor: f64) -> Self {
        self.growth_factor = growth_factor;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.growth_factor > 1.0) || !self.growth_factor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "radius growth factor must exceed 1, got {}",
                self.growth_factor
            )));
        }
        Ok(())
    }
}

/// Initial `C²` for `system`. `system` must be expressed in the coordinates
/// of the lattice actually searched, so that `diag(HᵀH)` (equal to
/// `diag(RᵀR)`) measures its basis vectors.
pub fn initial_radius(policy: &RadiusPolicy, system: &TriangularSystem) -> Result<f64> {
    let noise_radius = || {
        let sigma2 = system.noise_var();
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise-scaled radius needs σ² > 0, got {sigma2}"
            )));
        }
        Ok(2.0 * system.dimension() as f64 * sigma2)
    };
    let c2 = match policy.kind {
        RadiusKind::Fixed(c2) => c2,
        RadiusKind::NoiseScaled => noise_radius()?,
        RadiusKind::NoiseAndFading => noise_radius()?.min(system.min_column_energy()),
    };
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "squared radius must be positive and finite, got {c2}"
        )));
    }
    Ok(c2)
}

/// Next radius after an empty search, or an error once it stops being finite.
pub(crate) fn grow_radius(c2: f64, policy: &RadiusPolicy) -> Result<f64> {
    let next = c2 * policy.growth_factor;
    if !next.is_finite() {
        return Err(Error::InvalidParameter(
            "sphere radius diverged without finding a point".into(),
        ));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn diag_system(d: &[f64], sigma2: f64) -> TriangularSystem {
        TriangularSystem::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(d)),
            DVector::zeros(d.len()),
            sigma2,
        )
        .unwrap()
    }

    #[test]
    fn noise_scaled_radius() {
        let sys = diag_system(&[2.0; 8], 0.5);
        assert_eq!(initial_radius(&RadiusPolicy::noise_scaled(), &sys).unwrap(), 8.0);
    }

    #[test]
    fn noise_and_fading_takes_the_minimum() {
        let mut d = vec![2.0; 8];
        d[5] = 3f64.sqrt();
        let sys = diag_system(&d, 0.5);
        let c2 = initial_radius(&RadiusPolicy::noise_and_fading(), &sys).unwrap();
        assert!((c2 - 3.0).abs() < 1e-12);
        // the noise term wins when it is smaller
        let sys = diag_system(&d, 0.1);
        let c2 = initial_radius(&RadiusPolicy::noise_and_fading(), &sys).unwrap();
        assert!((c2 - 1.6).abs() < 1e-12);
    }

    #[test]
    fn fixed_radius_ignores_the_system() {
        let sys = diag_system(&[1.0, 5.0], 0.0);
        assert_eq!(initial_radius(&RadiusPolicy::fixed(10.0), &sys).unwrap(), 10.0);
        assert!(initial_radius(&RadiusPolicy::fixed(0.0), &sys).is_err());
        assert!(initial_radius(&RadiusPolicy::noise_scaled(), &sys).is_err());
    }

    #[test]
    fn column_energy_of_r_equals_that_of_h() {
        use crate::lattice::{qr_reduce, RealLatticeSystem};
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.0, 0.7, -0.2, 1.1]);
        let hth = h.transpose() * &h;
        let min_diag = hth.diagonal().min();
        let t = qr_reduce(&RealLatticeSystem::new(h, DVector::zeros(3)).unwrap()).unwrap();
        assert!((t.min_column_energy() - min_diag).abs() < 1e-12);
    }

    #[test]
    fn growth_must_exceed_one() {
        assert!(RadiusPolicy::noise_scaled().with_growth(1.0).validate().is_err());
        assert!(RadiusPolicy::noise_scaled().validate().is_ok());
    }
}
