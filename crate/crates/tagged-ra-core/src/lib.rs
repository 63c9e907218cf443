//! Link-level and MAC-level model of tagged-preamble random access.
//!
//! A random-access preamble is a cyclically shifted Zadoff-Chu (ZC) sequence.
//! In the scheme modelled here every transmitter adds a second, *tag* ZC
//! sequence on top of its preamble: the tag uses a different root (derived
//! from the preamble index) and a cyclic shift chosen at random by the node.
//! Because shifted ZC sequences of one root are orthogonal, a receiver can
//! correlate against the tag root and read one timing advance *per tag* even
//! when several nodes picked the same preamble — the tag separates colliding
//! nodes both by tag index and by timing, so most preamble collisions no
//! longer destroy the RA attempt.
//!
//! The crate is organised bottom-up:
//!
//! * [`zc`] — ZC sequence generation, cyclic shifts and circular correlation.
//! * [`preamble`] — cell configuration and tagged-preamble construction.
//! * [`channel`] — single-path delay plus complex AWGN synthesis.
//! * [`detector`] — threshold detection, multi-TA capture and RAR generation.
//! * [`analytic`] — Rician/Marcum machinery and the closed-form detection,
//!   capture, success and collision probabilities.
//! * [`macsim`] — seeded Monte Carlo of the MAC-level contention game.
//!
//! All randomness is driven by explicit 64-bit seeds through a counter-mode
//! generator, so every simulation in this crate is reproducible bit-for-bit
//! regardless of thread count.

pub mod analytic;
pub mod channel;
pub mod detector;
pub mod macsim;
pub mod preamble;
pub mod zc;

/// Complex sample type used throughout the public API.
pub use num_complex::Complex64;

use thiserror::Error;

/// Errors produced by constructors and operations across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    /// Two buffers that must have equal lengths did not.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
