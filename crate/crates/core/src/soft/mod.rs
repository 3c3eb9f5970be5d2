//! Candidate lists and log-likelihood ratios for soft-output detection.
//!
//! Lists hold constellation points with their distance `‖z - R x‖²`. Bits
//! of a point are read component-major with the in-phase half first: for a
//! realified vector `x = [Re s; Im s]` of `K` complex symbols the bit order
//! is `bits(x_1), bits(x_{K+1}), bits(x_2), bits(x_{K+2}), …`, each amplitude
//! contributing its Gray label MSB first.

mod list;
mod llr;

pub use list::{
    default_zeta, list_radius, list_sphere_decode, list_sphere_decode_with_radius,
    shifted_list_decode, shifted_list_radius, soft_sb_stack, unit_ball_volume,
};
pub use llr::{
    llr_exact, llr_maxlog, llr_quantize, point_bits, LlrVector, Quantizer, DEFAULT_LLR_MAX,
};

use crate::search::SearchStats;

/// One list entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Amplitudes of the point.
    pub point: Vec<i64>,
    /// `‖z - R x‖²`.
    pub raw_cost: f64,
}

/// Points sorted by nondecreasing cost, without duplicates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateList {
    pub entries: Vec<Candidate>,
    /// Set when the search region held fewer points than requested.
    pub truncated: bool,
    pub stats: SearchStats,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lowest-cost entry.
    pub fn best(&self) -> Option<&Candidate> {
        self.entries.first()
    }

    pub(crate) fn sort(&mut self) {
        self.entries.sort_by(|a, b| a.raw_cost.total_cmp(&b.raw_cost));
    }
}

/// When a list-building search stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ListPolicy {
    /// Collect this many points.
    FixedSize(usize),
    /// Collect every point whose cost does not exceed the ceiling.
    CostCeiling(f64),
}

impl ListPolicy {
    pub(crate) fn validate(&self) -> crate::Result<()> {
        let ok = match *self {
            ListPolicy::FixedSize(n) => n >= 1,
            ListPolicy::CostCeiling(c) => c > 0.0 && c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidParameter(format!(
                "list policy {self:?} admits no point"
            )))
        }
    }
}
