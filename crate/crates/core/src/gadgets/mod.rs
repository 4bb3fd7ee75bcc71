//! Reusable circuit fragments.
//!
//! Every gadget appends to a [`ConstraintSystem`](crate::circuit::ConstraintSystem).
//! Prover hints (bits, roots, selector vectors) are derived from the values
//! the system has propagated so far and enter as prover-only inputs.

pub mod bits;
pub mod lookup;
pub mod poseidon;
pub mod region;
pub mod sqrt;

use thiserror::Error;

use crate::circuit::CircuitError;
use crate::field::FieldError;

pub use bits::{assert_boolean, assert_leq, decompose_bits, is_nonneg, leq, range_check, BitVector};
pub use lookup::{characteristic_vector, lookup, lookup_with_selector, select};
pub use poseidon::{poseidon_hash, poseidon_permute, PoseidonParams};
pub use region::{and, area_dbl, check_inside, check_inside_triangle, or};
pub use sqrt::{sqrt_floor, sqrt_floor_with, SqrtMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("cannot hash an empty message")]
    EmptyMessage,
    #[error("width {width} too large for a {field_bits}-bit modulus")]
    WidthTooLarge { width: u32, field_bits: u32 },
    #[error("state has {got} lanes, expected {expected}")]
    WrongStateWidth { expected: usize, got: usize },
    #[error("invalid Poseidon parameters: {0}")]
    Poseidon(String),
    #[error("lookup table rows have inconsistent widths")]
    RaggedTable,
}
