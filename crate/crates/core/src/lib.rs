//! Constructive effective universality for Selberg-class L-functions.
//!
//! The crate builds phase vectors that push a truncated Euler product onto a
//! prescribed vector of derivatives, computes the explicit constants and
//! thresholds that go with the construction, and checks the claims against a
//! built-in evaluator for ζ and Dirichlet L-functions.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod eval;
pub mod lfunc;
pub mod mollifier;
pub mod phases;
pub mod powseries;
pub mod quad;
pub mod sieve;
pub mod vandermonde;

pub use error::{Error, Result};
pub use lfunc::LFunctionDescriptor;
pub use phases::PhaseAssignment;
pub use powseries::TruncatedSeries;
