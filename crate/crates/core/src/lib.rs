//! Phase-error bounds and secure key rates for coherent-state differential
//! phase shift QKD with block-wise phase randomization.
//!
//! Modules, bottom-up:
//!
//! * [`linalg`]: tri-diagonal Sturm bisection, dense Jacobi, concave envelopes.
//! * [`operators`]: the bit-error operator Π̂, the diagonal phase-error
//!   operators Π̂^(ph)_ā, and the candidate matrices whose top eigenvalues
//!   make up Ω^(ν)(λ).
//! * [`omega`]: Ω^(ν)(λ), sampled curves, the (e, e_ph) region boundary and
//!   the entropy support function Ω_h^(ν)(γ).
//! * [`keyrate`]: Poisson allocation, channel model and key rates.
//! * [`asymptotics`]: low-transmission coefficients and threshold error rates.
//! * [`oracle`]: brute-force operators on the joint register space.
//! * [`verify`]: checks of the fast path against the oracle.

pub mod asymptotics;
pub mod entropy;
pub mod error;
pub mod keyrate;
pub mod linalg;
pub mod omega;
pub mod operators;
pub mod optimize;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};

/// Absolute tolerance used by the eigen-solvers unless a caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-12;
