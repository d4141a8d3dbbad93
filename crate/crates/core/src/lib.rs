//! Secrecy rate regions and coding simulation for state-dependent
//! multiple-access wiretap channels with causal state information at the
//! encoders.
//!
//! The crate is organised in four layers:
//!
//! * [`prob`]: dense finite-alphabet distributions, entropies and mutual
//!   informations, and assembly of the joint law of
//!   `(S, V, U, U1, U2, X1, X2, Y, Z)` from a channel and an auxiliary chain.
//! * [`region`]: the inequality systems of every achievable region, their
//!   projection to the two-rate plane, searches over auxiliary
//!   distributions, and closed-form capacity curves.
//! * [`sim`]: a desk-scale execution of the block-Markov scheme with
//!   Wyner-Ziv key generation, one-time-pad encryption and backward
//!   joint-typicality decoding, including error and leakage estimators.
//! * [`cli`]: the `mawc` command-line front end (`region`, `example`,
//!   `simulate`, `validate`).
//!
//! All information quantities are in bits.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod prob;
pub mod region;
pub mod sim;

pub use error::{Error, Result};
