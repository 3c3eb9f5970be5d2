//! Tree-search decoders for lattice-coded MIMO systems.
//!
//! The crate turns a complex channel (optionally with a linear space-time
//! block code) into a real upper-triangular system `z = R x + w` and decodes
//! it with depth-first sphere decoding, best-first stack decoding or the
//! spherical-bound stack decoder, which combines the sphere constraint with
//! best-first ordering. Candidate lists feed max-log LLRs for a soft-output
//! receiver, and a small communication chain plus a Monte Carlo runner
//! reproduce error-rate and complexity curves.

pub mod chain;
pub mod constellation;
pub mod error;
pub mod lattice;
pub mod search;
pub mod sim;
pub mod soft;

pub use constellation::Constellation;
pub use error::{Error, Result};
pub use lattice::{RealLatticeSystem, TriangularSystem};
