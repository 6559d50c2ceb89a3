//! Numerical certification of a gap between tensor norms on matrix spaces.
//!
//! The library builds a family of explicit sparse tensors indexed by a prime
//! dimension `n` — a modular constraint element `eta_n`, its dual witness
//! `p_n`, and their images `beta_n`, `q_n` under teleportation-style transfer
//! maps — and certifies two facts about them:
//!
//! * a **lower bound** `n` on the symmetrized Haagerup norm, obtained from an
//!   exact duality pairing against a witness whose structured Haagerup chain
//!   norm evaluates to 1, and
//! * an **upper bound** `sqrt(2) * n^(3/4)` on the commuting-strategy (max
//!   norm) value, whose proof ingredients — subnormalized measurement families
//!   extracted from complete contractions, Fourier matrix norms, and a
//!   constraint-sum Fourier expansion — are each verified numerically.
//!
//! The ratio of the two bounds is `n^(1/4) / sqrt(2)`, which exceeds 1 for
//! every prime `n >= 5`; the [`counterexample`] module packages the checks
//! into tamper-evident certificates and a per-`n` violation report.
//!
//! All tolerances are fixed constants, not configuration: certificates are
//! meant to be reproducible bit for bit given the same seed.

pub mod certificate;
pub mod checks;
pub mod counterexample;
pub mod error;
pub mod game;
pub mod haagerup;
pub mod linalg;
pub mod teleport;
pub mod tensor;
pub mod weyl;

pub use error::Error;
pub use linalg::{CMat, CVec, C64};

/// Entries with magnitude at or below this threshold are pruned from sparse
/// tensors; the value is recorded in emitted certificates.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Convenience result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
