//! Floor square root with optionally one-sided checks.

use serde::{Deserialize, Serialize};

use crate::circuit::{ConstraintSystem, Domain, Wire};
use crate::field::FieldElement;
use crate::localcalc::isqrt;

use super::bits::{assert_leq, range_check};
use super::GadgetError;

/// Which of the two bounds `d^2 <= sq < (d+1)^2` are enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqrtMode {
    Both,
    /// Only `d^2 <= sq`: the prover can understate `d` but not overstate it.
    LowerOnly,
    /// Only `sq < (d+1)^2`: the prover can overstate `d` but not understate it.
    UpperOnly,
}

impl SqrtMode {
    fn lower(self) -> bool {
        matches!(self, SqrtMode::Both | SqrtMode::LowerOnly)
    }

    fn upper(self) -> bool {
        matches!(self, SqrtMode::Both | SqrtMode::UpperOnly)
    }
}

/// Honest floor square root of `sq`, for `sq` in `[0, 2^(2k))`.
pub fn sqrt_floor(cs: &mut ConstraintSystem, sq: Wire, k: u32, mode: SqrtMode) -> Result<Wire, GadgetError> {
    let d = cs.hint(sq).map(|v| cs.field().elem(isqrt(v.value())));
    sqrt_floor_with(cs, sq, k, mode, d)
}

/// As [`sqrt_floor`] with the prover's root supplied explicitly.
///
/// `d` is range-checked to `k` bits; the enforced bounds are then compared
/// at widths `2k` (lower) and `2k + 1` (upper), which cover `d^2` and
/// `(d+1)^2 <= 2^(2k)`.
pub fn sqrt_floor_with(
    cs: &mut ConstraintSystem,
    sq: Wire,
    k: u32,
    mode: SqrtMode,
    d: Option<FieldElement>,
) -> Result<Wire, GadgetError> {
    let f = cs.field();
    let d = cs.input(d, Domain::ProverOnly)?;
    range_check(cs, d, k)?;
    let d2 = cs.mul(d, d)?;
    if mode.lower() {
        assert_leq(cs, d2, sq, 2 * k)?;
    }
    if mode.upper() {
        // sq + 1 <= d^2 + 2d + 1
        let lhs = cs.add_const(sq, FieldElement::ONE)?;
        let rhs = cs.affine(&[(FieldElement::ONE, d2), (f.elem(2), d)], FieldElement::ONE)?;
        assert_leq(cs, lhs, rhs, 2 * k + 1)?;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn run(sq: u128, k: u32, mode: SqrtMode, d: Option<u128>) -> (u128, bool) {
        let mut cs = ConstraintSystem::new(Field::default());
        let f = cs.field();
        let w = cs.wire_input(f.elem(sq), Domain::ProverOnly).unwrap();
        let r = match d {
            None => sqrt_floor(&mut cs, w, k, mode).unwrap(),
            Some(d) => sqrt_floor_with(&mut cs, w, k, mode, Some(f.elem(d))).unwrap(),
        };
        let v = cs.hint(r).unwrap().value();
        (v, cs.evaluate_and_check().unwrap().satisfied)
    }

    #[test]
    fn honest_examples() {
        assert_eq!(run(25, 4, SqrtMode::Both, None), (5, true));
        assert_eq!(run(24, 4, SqrtMode::Both, None), (4, true));
        assert_eq!(run(0, 4, SqrtMode::Both, None), (0, true));
        assert_eq!(run(255, 4, SqrtMode::Both, None), (15, true));
    }

    #[test]
    fn cheating_roots() {
        assert!(!run(25, 4, SqrtMode::Both, Some(6)).1);
        assert!(!run(25, 4, SqrtMode::Both, Some(4)).1);
        // Understating passes the lower bound only.
        assert!(run(25, 4, SqrtMode::LowerOnly, Some(4)).1);
        assert!(!run(25, 4, SqrtMode::LowerOnly, Some(6)).1);
        // Overstating passes the upper bound only.
        assert!(run(25, 4, SqrtMode::UpperOnly, Some(6)).1);
        assert!(!run(25, 4, SqrtMode::UpperOnly, Some(4)).1);
        // Roots outside the k-bit range are rejected in every mode.
        assert!(!run(25, 4, SqrtMode::UpperOnly, Some(16)).1);
    }

    #[test]
    fn small_exhaustive() {
        for v in 0..(1u128 << 12) {
            let (d, ok) = run(v, 6, SqrtMode::Both, None);
            assert!(ok && d * d <= v && v < (d + 1) * (d + 1), "v = {v}");
        }
    }
}
