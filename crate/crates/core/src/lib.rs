//! Zero-knowledge proof-of-location statements over a cleartext constraint
//! system.
//!
//! The crate builds the arithmetic circuits for two location statements (an
//! electric-vehicle subsidy check and a highway tax check), evaluates them
//! with a satisfiability checker standing in for a real proof backend, and
//! simulates the Witness device / Prover / Verifier protocol around them.
//!
//! Module map:
//! - [`field`]: prime-field arithmetic and the overflow ledger.
//! - [`circuit`]: visibility-tagged constraint system.
//! - [`gadgets`]: booleanity, comparisons, square roots, Poseidon, region
//!   membership and oblivious lookup.
//! - [`statements`]: the two full statements.
//! - [`localcalc`]: prover-local helpers and plaintext reference verdicts.
//! - [`protocol`]: session simulation with signatures and corruption hooks.
//! - [`appio`]: JSON formats and fixture generation.

pub mod appio;
pub mod circuit;
pub mod field;
pub mod gadgets;
pub mod geometry;
pub mod localcalc;
pub mod protocol;
pub mod statements;

pub use circuit::{AccessAudit, ConstraintSystem, Counters, Domain, Reader, SatisfactionReport, Stage, Wire};
pub use field::{Field, FieldElement, FieldParams, OverflowLedger};
pub use gadgets::poseidon::PoseidonParams;
pub use geometry::{Circle, Point, Rect, Triangle};
pub use statements::{
    AuthorityData, Geometry, Policy, StatementInstance, StatementKind, SubsidyPolicy, TaxPolicy, Trail,
};
