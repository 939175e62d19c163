//! Minimal-prime statistics of generalized Goldbach `(m1, m2)`-partitions
//! `n = m1·p + m2·q`.
//!
//! The crate is organised bottom-up:
//!
//! - [`primes`]: prime store (bitset sieve or deterministic Miller–Rabin) and
//!   residue-class cursors.
//! - [`partitions`]: admissibility of `n` and the p-minimal partition search.
//! - [`sweep`]: per-pair scans over all admissible `n <= L` with exact
//!   statistics, parallel segments and checkpoint/resume.
//! - [`predictor`]: the rank predictor `R`, its truncated diagnostic `R'(n)`,
//!   the Hardy–Littlewood count estimate, Euler's totient and the speed
//!   comparator `g_L`.
//! - [`ranking`]: tie-aware rankings and Spearman's rho.
//! - [`proposition`]: residue-class characterisation of `n = m1·p + m2·q`
//!   and its exhaustive verification.
//! - [`cli`]: the `ggc` command-line front end.

pub mod arith;
pub mod cli;
pub mod error;
pub mod partitions;
pub mod predictor;
pub mod primes;
pub mod proposition;
pub mod ranking;
pub mod sweep;

pub use error::{Error, Result};
pub use partitions::{CoeffPair, Partition, PartitionOutcome};
pub use primes::PrimeStore;
