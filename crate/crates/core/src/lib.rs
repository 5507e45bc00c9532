//! Exact computations around symmetric neighbourhoods of the identity inside
//! `A²A⁻²` for finite sets `A` of small doubling in arbitrary finite groups.
//!
//! - [`group`]: finite group backends with dense canonical element codes.
//! - [`set`]: product sets, convolutions and energies.
//! - [`symmetry`]: symmetry sets `Sym_η(A)`.
//! - [`neighbourhood`]: the shrinking dichotomy, its iteration and certificates.
//! - [`oracle`]: brute-force reference implementations and the verifier.
//! - [`instances`]: seeded instance generators.

pub mod certificate;
pub mod cli;
pub mod error;
pub mod group;
pub mod instances;
pub mod json;
pub mod ledger;
pub mod neighbourhood;
pub mod oracle;
pub mod prng;
pub mod rational;
pub mod set;
pub mod symmetry;

pub use certificate::Certificate;
pub use error::{Error, Result};
pub use group::{GroupContext, GroupElement, GroupSpec, Limits};
pub use instances::{generate, InstanceSpec, SetSpec};
pub use ledger::{LedgerEntry, Relation};
pub use neighbourhood::{almost_invariant, lemma_step, proposition_run, theorem_main};
pub use oracle::{verify_certificate, VerificationReport};
pub use rational::Rational;
pub use set::GSet;
pub use symmetry::sym_set;
