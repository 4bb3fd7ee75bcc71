//! Circle and triangle membership.

use crate::circuit::{ConstraintSystem, Domain, Wire};
use crate::field::FieldElement;
use crate::localcalc::BaryCoords;

use super::bits::{is_nonneg, leq};
use super::GadgetError;

/// `a OR b` for boolean wires, as `a + b - ab`.
pub fn or(cs: &mut ConstraintSystem, a: Wire, b: Wire) -> Result<Wire, GadgetError> {
    let ab = cs.mul(a, b)?;
    let m1 = cs.field().minus_one();
    Ok(cs.affine(&[(FieldElement::ONE, a), (FieldElement::ONE, b), (m1, ab)], FieldElement::ZERO)?)
}

/// `a AND b` for boolean wires.
pub fn and(cs: &mut ConstraintSystem, a: Wire, b: Wire) -> Result<Wire, GadgetError> {
    Ok(cs.mul(a, b)?)
}

/// Boolean wire: whether `(x, y)` lies in some circle `(u_i, v_i)` with
/// squared radius `s_i` (boundary included).
///
/// Coordinates must be in `[0, 2^k_c)` and `s_i < 2^(2k_c)`, so squared
/// distances fit the comparison width `2k_c + 1`.
pub fn check_inside(
    cs: &mut ConstraintSystem,
    u: &[Wire],
    v: &[Wire],
    s: &[Wire],
    x: Wire,
    y: Wire,
    coord_bits: u32,
) -> Result<Wire, GadgetError> {
    assert!(u.len() == v.len() && v.len() == s.len(), "circle columns differ in length");
    let mut acc: Option<Wire> = None;
    for ((&ui, &vi), &si) in u.iter().zip(v).zip(s) {
        let dx = cs.sub(x, ui)?;
        let dy = cs.sub(y, vi)?;
        let dx2 = cs.mul(dx, dx)?;
        let dy2 = cs.mul(dy, dy)?;
        let sq = cs.add(dx2, dy2)?;
        let b = leq(cs, sq, si, 2 * coord_bits + 1)?;
        acc = Some(match acc {
            None => b,
            Some(a) => or(cs, a, b)?,
        });
    }
    Ok(acc.unwrap_or_else(|| cs.constant(FieldElement::ZERO)))
}

/// Doubled signed area `a1(b2 - b3) + a2(b3 - b1) + a3(b1 - b2)`; equal to
/// the determinant expansion and positive for counterclockwise vertices.
pub fn area_dbl(cs: &mut ConstraintSystem, a: [Wire; 3], b: [Wire; 3]) -> Result<Wire, GadgetError> {
    let d1 = cs.sub(b[1], b[2])?;
    let d2 = cs.sub(b[2], b[0])?;
    let d3 = cs.sub(b[0], b[1])?;
    let t1 = cs.mul(a[0], d1)?;
    let t2 = cs.mul(a[1], d2)?;
    let t3 = cs.mul(a[2], d3)?;
    Ok(cs.sum(&[t1, t2, t3])?)
}

/// Boolean wire: whether `(x, y)` lies in the counterclockwise triangle with
/// vertices `(a_k, b_k)`, boundary included.
///
/// The prover supplies unnormalized barycentric coordinates `(s, t)`; with
/// `u = A - s - t` the reconstruction `u*a1 + s*a2 + t*a3 = x*A` (and the
/// same for `b`, `y`) is asserted and the verdict is `s, t, u >= 0`. Each of
/// `s, t, u` is range-checked to `[-2^m, 2^m)`, `m = 2k_c + 3`, so the
/// reconstruction cannot wrap modulo `p`.
pub fn check_inside_triangle(
    cs: &mut ConstraintSystem,
    a: [Wire; 3],
    b: [Wire; 3],
    x: Wire,
    y: Wire,
    bcoords: Option<BaryCoords>,
    coord_bits: u32,
) -> Result<Wire, GadgetError> {
    let f = cs.field();
    let area = area_dbl(cs, a, b)?;
    let (s_val, t_val) = match bcoords {
        Some(c) => (Some(f.from_signed(c.s)?), Some(f.from_signed(c.t)?)),
        None => (None, None),
    };
    let s = cs.input(s_val, Domain::ProverOnly)?;
    let t = cs.input(t_val, Domain::ProverOnly)?;
    let m1 = f.minus_one();
    let u = cs.affine(&[(FieldElement::ONE, area), (m1, s), (m1, t)], FieldElement::ZERO)?;
    for (coords, target) in [(a, x), (b, y)] {
        let p1 = cs.mul(u, coords[0])?;
        let p2 = cs.mul(s, coords[1])?;
        let p3 = cs.mul(t, coords[2])?;
        let rhs = cs.mul(target, area)?;
        let diff = cs.affine(
            &[(FieldElement::ONE, p1), (FieldElement::ONE, p2), (FieldElement::ONE, p3), (m1, rhs)],
            FieldElement::ZERO,
        )?;
        cs.assert_zero(diff)?;
    }
    let m = 2 * coord_bits + 3;
    let ns = is_nonneg(cs, s, m)?;
    let nt = is_nonneg(cs, t, m)?;
    let nu = is_nonneg(cs, u, m)?;
    let st = and(cs, ns, nt)?;
    and(cs, st, nu)
}
