//! Exact state-vector simulation of von Neumann measurements of nonlocal
//! two-particle spin variables.
//!
//! A pair of spins (the system) is measured with a pair of entangled path
//! qubits (the pointer). Local couplings at each site, followed by local
//! readout of the pointer, yield records whose correlation reveals the
//! eigenvalue of a product observable such as `σ_x^A σ_y^B` without
//! disturbing its eigenstates.
//!
//! * [`qstate`]: dense 16-amplitude register, local gates, projectors.
//! * [`protocol`]: pointer preparation, couplings, readout and decoding,
//!   plus a direct projective oracle.
//! * [`experiments`]: reliability, nondemolition, product-rule and
//!   signaling experiments.
//! * [`sampler`]: seeded multinomial coincidence counts.
//! * [`exec`]: rayon or sequential execution (feature `parallel`).

pub mod error;
pub mod exec;
pub mod experiments;
pub mod protocol;
pub mod qstate;
pub mod random;
pub mod sampler;

pub use error::{Error, Result};
