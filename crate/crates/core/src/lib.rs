//! Secure multiparty computation of symmetric Boolean functions with a single
//! circulating qubit.
//!
//! - [`angles`]: exact rational multiples of π and `R_y` gates.
//! - [`qubit`]: one-qubit state vectors, density matrices and noise.
//! - [`symfn`]: symmetric functions, their `f_n^k` decomposition and circuits.
//! - [`protocol`]: the message-passing protocol, transcripts and leakage checks.

pub mod angles;
pub mod qubit;
pub mod rng;
pub mod symfn;
pub mod protocol;
