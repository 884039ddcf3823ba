//! Exact values, bounds and extremal sequences for the Davenport constant `D(φ, p)` of the
//! quadratic symmetric polynomial `φ = a·s₁² + b·s₂ + c·s₁` over `F_p`.
//!
//! `D(φ, p)` is the least `ℓ` such that every sequence of `ℓ` elements of `F_p` has a
//! nonempty sub-multiset `T` with `φ(T) = 0`, where `s₁`, `s₂` are the sum and the sum of
//! squares of `T`.
//!
//! - [`modp`]: prime-field arithmetic and quadratic residues
//! - [`phi`]: `φ`, sequences, and the reachability test for zero-freeness
//! - [`search`]: exact branch-and-bound computation of `D(φ, p)` and `M(φ, p)`
//! - [`theory`]: closed forms, proved bounds and witness sequences
//! - [`report`]: output records and the table/verification drivers behind the CLI

pub mod error;
pub mod modp;
pub mod phi;
pub mod report;
pub mod search;
pub mod theory;

pub use error::{Error, Result};
pub use modp::{Prime, Residue};
pub use phi::{MultisetSeq, QuadPhi};
