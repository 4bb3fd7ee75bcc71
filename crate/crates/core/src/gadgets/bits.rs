//! Booleanity, bit decomposition and comparisons.

use crate::circuit::{ConstraintSystem, Domain, Wire};
use crate::field::FieldElement;

use super::GadgetError;

/// Little-endian bits of a wire, each boolean-asserted, with the
/// recomposition asserted equal to the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitVector {
    bits: Vec<Wire>,
}

impl BitVector {
    pub fn bits(&self) -> &[Wire] {
        &self.bits
    }

    pub fn width(&self) -> u32 {
        self.bits.len() as u32
    }

    /// Most significant bit.
    pub fn top(&self) -> Wire {
        *self.bits.last().expect("bit vectors are never empty")
    }
}

/// Asserts `w * (w - 1) = 0`.
pub fn assert_boolean(cs: &mut ConstraintSystem, w: Wire) -> Result<(), GadgetError> {
    let m1 = cs.field().minus_one();
    let wm1 = cs.add_const(w, m1)?;
    let prod = cs.mul(w, wm1)?;
    cs.assert_zero(prod)?;
    Ok(())
}

fn check_width(cs: &ConstraintSystem, k: u32) -> Result<(), GadgetError> {
    let field_bits = cs.field().bits();
    // Recomposition must be injective and the shifted comparisons must not wrap.
    if k == 0 || k + 2 > field_bits {
        return Err(GadgetError::WidthTooLarge { width: k, field_bits });
    }
    Ok(())
}

/// Decomposes `w` into `k` prover-supplied bits.
///
/// If the value of `w` is not below `2^k` the low `k` bits are supplied and
/// the recomposition assertion fails.
pub fn decompose_bits(cs: &mut ConstraintSystem, w: Wire, k: u32) -> Result<BitVector, GadgetError> {
    check_width(cs, k)?;
    let f = cs.field();
    let value = cs.hint(w).map(|v| v.value());
    let mut bits = Vec::with_capacity(k as usize);
    let mut terms = Vec::with_capacity(k as usize + 1);
    for i in 0..k {
        let bit = value.map(|v| FieldElement::from((v >> i) & 1 == 1));
        let b = cs.input(bit, Domain::ProverOnly)?;
        assert_boolean(cs, b)?;
        terms.push((f.pow(f.elem(2), i as u128), b));
        bits.push(b);
    }
    terms.push((f.minus_one(), w));
    let diff = cs.affine(&terms, FieldElement::ZERO)?;
    cs.assert_zero(diff)?;
    Ok(BitVector { bits })
}

/// Constrains `w` to `[0, 2^k)`.
pub fn range_check(cs: &mut ConstraintSystem, w: Wire, k: u32) -> Result<(), GadgetError> {
    decompose_bits(cs, w, k).map(|_| ())
}

/// Top bit of `sum(terms) + 2^shift` decomposed into `shift + 1` bits.
fn shifted_top_bit(cs: &mut ConstraintSystem, terms: &[(FieldElement, Wire)], shift: u32) -> Result<Wire, GadgetError> {
    check_width(cs, shift + 1)?;
    let f = cs.field();
    let offset = cs.affine(terms, f.pow(f.elem(2), shift as u128))?;
    Ok(decompose_bits(cs, offset, shift + 1)?.top())
}

/// Boolean wire equal to `[a <= b]`, for `a, b` in `[0, 2^k)`.
///
/// `b - a + 2^k` lies in `[1, 2^(k+1))` and reaches `2^k` exactly when `a <= b`.
pub fn leq(cs: &mut ConstraintSystem, a: Wire, b: Wire, k: u32) -> Result<Wire, GadgetError> {
    let m1 = cs.field().minus_one();
    shifted_top_bit(cs, &[(FieldElement::ONE, b), (m1, a)], k)
}

/// Asserts `a <= b` for `a, b` in `[0, 2^k)`.
pub fn assert_leq(cs: &mut ConstraintSystem, a: Wire, b: Wire, k: u32) -> Result<(), GadgetError> {
    let bit = leq(cs, a, b, k)?;
    let m1 = cs.field().minus_one();
    let d = cs.add_const(bit, m1)?;
    cs.assert_zero(d)?;
    Ok(())
}

/// Boolean wire equal to `[v >= 0]` for a signed `v` in `[-2^m, 2^m)`.
/// Also constrains `v` to that range.
pub fn is_nonneg(cs: &mut ConstraintSystem, v: Wire, m: u32) -> Result<Wire, GadgetError> {
    shifted_top_bit(cs, &[(FieldElement::ONE, v)], m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use proptest::prelude::*;

    fn cs() -> ConstraintSystem {
        ConstraintSystem::new(Field::default())
    }

    fn satisfied(mut cs: ConstraintSystem) -> bool {
        cs.evaluate_and_check().unwrap().satisfied
    }

    fn prover(cs: &mut ConstraintSystem, v: u128) -> Wire {
        let e = cs.field().elem(v);
        cs.wire_input(e, Domain::ProverOnly).unwrap()
    }

    #[test]
    fn boolean_examples() {
        for (v, ok) in [(0, true), (1, true), (2, false)] {
            let mut c = cs();
            let w = prover(&mut c, v);
            assert_boolean(&mut c, w).unwrap();
            assert_eq!(satisfied(c), ok, "value {v}");
        }
    }

    #[test]
    fn decompose_examples() {
        let mut c = cs();
        let w = prover(&mut c, 5);
        let bv = decompose_bits(&mut c, w, 3).unwrap();
        let bits: Vec<u128> = bv.bits().iter().map(|&b| c.hint(b).unwrap().value()).collect();
        assert_eq!(bits, vec![1, 0, 1]);
        assert!(satisfied(c));

        let mut c = cs();
        let w = prover(&mut c, 0);
        let bv = decompose_bits(&mut c, w, 4).unwrap();
        assert!(bv.bits().iter().all(|&b| c.hint(b).unwrap().is_zero()));
        assert!(satisfied(c));

        let mut c = cs();
        let w = prover(&mut c, 1 << 6);
        decompose_bits(&mut c, w, 6).unwrap();
        assert!(!satisfied(c));
    }

    #[test]
    fn width_limit() {
        let mut c = cs();
        let w = prover(&mut c, 1);
        assert!(decompose_bits(&mut c, w, 125).is_ok());
        assert_eq!(decompose_bits(&mut c, w, 126), Err(GadgetError::WidthTooLarge { width: 126, field_bits: 127 }));
        assert!(leq(&mut c, w, w, 125).is_err());
        assert!(decompose_bits(&mut c, w, 0).is_err());
    }

    fn leq_value(a: u128, b: u128, k: u32) -> (u128, bool) {
        let mut c = cs();
        let (wa, wb) = (prover(&mut c, a), prover(&mut c, b));
        let r = leq(&mut c, wa, wb, k).unwrap();
        let v = c.hint(r).unwrap().value();
        (v, satisfied(c))
    }

    #[test]
    fn leq_examples() {
        assert_eq!(leq_value(3, 5, 4), (1, true));
        assert_eq!(leq_value(5, 3, 4), (0, true));
        assert_eq!(leq_value(7, 7, 4), (1, true));
        assert_eq!(leq_value(0, 15, 4), (1, true));
        assert_eq!(leq_value(15, 0, 4), (0, true));
    }

    #[test]
    fn assert_leq_examples() {
        for (a, b, ok) in [(0, 0, true), (10, 12, true), (12, 10, false)] {
            let mut c = cs();
            let (wa, wb) = (prover(&mut c, a), prover(&mut c, b));
            assert_leq(&mut c, wa, wb, 8).unwrap();
            assert_eq!(satisfied(c), ok);
        }
    }

    #[test]
    fn nonneg_examples() {
        let f = Field::default();
        for (v, bit, ok) in [
            (0i128, 1, true),
            (5, 1, true),
            (-1, 0, true),
            (-16, 0, true),
            (15, 1, true),
            (16, 0, false),
            (-17, 1, false),
        ] {
            let mut c = cs();
            let w = c.wire_input(f.from_signed(v).unwrap(), Domain::ProverOnly).unwrap();
            let r = is_nonneg(&mut c, w, 4).unwrap();
            assert_eq!(c.hint(r).unwrap().value(), bit, "v = {v}");
            assert_eq!(satisfied(c), ok, "v = {v}");
        }
    }

    #[test]
    fn cheating_bits_are_caught() {
        // Claim that 3 > 5 by flipping the top bit of the shifted difference.
        let mut c = cs();
        let (wa, wb) = (prover(&mut c, 5), prover(&mut c, 3));
        let bit = leq(&mut c, wa, wb, 4).unwrap();
        c.set_witness(bit, FieldElement::ONE).unwrap();
        assert!(!satisfied(c));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn leq_matches_integers(k in 1u32..60, a in any::<u64>(), b in any::<u64>()) {
            let mask = (1u128 << k) - 1;
            let (a, b) = (a as u128 & mask, b as u128 & mask);
            let (v, ok) = leq_value(a, b, k);
            prop_assert!(ok);
            prop_assert_eq!(v == 1, a <= b);
        }

        #[test]
        fn decompose_roundtrip(v in any::<u64>()) {
            let mut c = cs();
            let w = prover(&mut c, v as u128);
            let bv = decompose_bits(&mut c, w, 64).unwrap();
            let back = bv.bits().iter().enumerate()
                .fold(0u128, |acc, (i, &b)| acc | (c.hint(b).unwrap().value() << i));
            prop_assert_eq!(back, v as u128);
            prop_assert!(satisfied(c));
        }
    }
}
