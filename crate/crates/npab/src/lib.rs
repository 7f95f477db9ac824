//! Desk-scale simulator and library for a BB84-style quantum key
//! distribution protocol in which Alice and Bob replace the public basis
//! announcement with a pre-shared secret basis sequence that is reused for
//! several rounds, followed by classical code-pair reconciliation and
//! coset-label key extraction.
//!
//! The crate is organized around the protocol's moving parts:
//!
//! - [`qcore`]: exact single-qubit states, Pauli/Hadamard operators,
//!   measurement, density matrices and trace distance.
//! - [`gf2codes`]: GF(2) linear algebra, syndrome decoding, nested code
//!   pairs and coset-label key extraction.
//! - [`sources`]: ideal, imperfect-direct and entangled photon sources.
//! - [`adversary`]: eavesdropping strategies (intercept-resend, Pauli
//!   channels, correlated Pauli channels, basis learners) and the
//!   basis-information leakage estimator.
//! - [`protocol`]: Alice/Bob session state machines with strict phase
//!   ordering, check-bit testing, reconciliation and the basis-sequence
//!   lifecycle.
//! - [`stats`]: campaign summaries, the three-arm error-rate deviation
//!   study and Hoeffding bounds.
//! - [`config`]: the flat `section.key = value` experiment config format.
//! - [`report`]: JSON/CSV writers with fixed 12-significant-digit floats.
//! - [`rng`]: named deterministic random streams derived from one seed.
//!
//! All randomness flows from a single 64-bit seed through named streams, so
//! any experiment is reproducible byte for byte.

pub mod adversary;
pub mod config;
pub mod error;
pub mod gf2codes;
pub mod protocol;
pub mod qcore;
pub mod report;
pub mod rng;
pub mod sources;
pub mod stats;

pub use error::{Error, Result};
