//! Off-circuit computations: the prover's helper routines for the highway
//! statement, and plaintext reference verdicts for both statements.
//!
//! The reference verdicts (`oracle_*`, [`point_in_triangle`]) are written
//! independently of the circuit gadgets. In particular triangle membership
//! here uses edge orientation signs, not barycentric coordinates or area
//! sums, so it cross-checks both [`find_triangle`] and the in-circuit test.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldElement;
use crate::gadgets::{GadgetError, PoseidonParams};
use crate::geometry::{Circle, Point, Triangle};
use crate::statements::{SubsidyPolicy, TaxPolicy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("degenerate triangle (zero area)")]
    DegenerateTriangle,
}

/// Signed doubled area: the determinant of `[[a1 a2 a3] [b1 b2 b3] [1 1 1]]`.
/// Positive for counterclockwise vertex order.
pub fn area_dbl_sgn(a1: i64, b1: i64, a2: i64, b2: i64, a3: i64, b3: i64) -> i128 {
    let (a1, b1, a2, b2, a3, b3) = (a1 as i128, b1 as i128, a2 as i128, b2 as i128, a3 as i128, b3 as i128);
    a1 * b2 - a1 * b3 - a2 * b1 + a2 * b3 + a3 * b1 - a3 * b2
}

fn area_of(p: Point, q: Point, r: Point) -> i128 {
    area_dbl_sgn(p.x, p.y, q.x, q.y, r.x, r.y)
}

impl Triangle {
    pub fn area_dbl_sgn(&self) -> i128 {
        let [p, q, r] = self.0;
        area_of(p, q, r)
    }
}

/// 1-based index of the first triangle containing `(x, y)` (boundary
/// included), or 1 if none does.
///
/// A point lies in a triangle exactly when the three sub-triangles it forms
/// with the edges cover the triangle without overlap, i.e. their absolute
/// areas sum to the triangle's.
pub fn find_triangle(x: i64, y: i64, triangles: &[Triangle]) -> usize {
    let p = Point::new(x, y);
    for (i, tri) in triangles.iter().enumerate() {
        let [v1, v2, v3] = tri.0;
        let a = area_of(v1, v2, v3).abs();
        let b = area_of(v1, v2, p).abs();
        let c = area_of(v1, p, v3).abs();
        let d = area_of(p, v2, v3).abs();
        if a == b + c + d {
            return i + 1;
        }
    }
    1
}

/// Unnormalized barycentric coordinates. With `A` the doubled (unsigned)
/// triangle area, `s + t + u = A` and the weights belong to vertices
/// 2, 3 and 1 respectively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaryCoords {
    pub s: i128,
    pub t: i128,
}

impl BaryCoords {
    /// Third coordinate, `A - s - t`.
    pub fn u(&self, area_dbl: i128) -> i128 {
        area_dbl - self.s - self.t
    }
}

/// Division-free barycentric coordinates of `(x, y)` in `tri`, sign-corrected
/// so that points inside get non-negative coordinates whatever the vertex
/// order.
pub fn get_bcoords(x: i64, y: i64, tri: &Triangle) -> Result<BaryCoords, LocalError> {
    let area = tri.area_dbl_sgn();
    if area == 0 {
        return Err(LocalError::DegenerateTriangle);
    }
    let sgn: i128 = if area >= 0 { 1 } else { -1 };
    let [p1, p2, p3] = tri.0;
    let (a1, b1, a2, b2, a3, b3) = (p1.x as i128, p1.y as i128, p2.x as i128, p2.y as i128, p3.x as i128, p3.y as i128);
    let (x, y) = (x as i128, y as i128);
    let s = sgn * (b1 * a3 - a1 * b3 + (b3 - b1) * x + (a1 - a3) * y);
    let t = sgn * (a1 * b2 - b1 * a2 + (b1 - b2) * x + (a2 - a1) * y);
    Ok(BaryCoords { s, t })
}

/// Orientation-sign containment test, boundary included.
pub fn point_in_triangle(p: Point, tri: &Triangle) -> bool {
    let [a, b, c] = tri.0;
    let cross = |o: Point, q: Point| -> i128 {
        (q.x - o.x) as i128 * (p.y - o.y) as i128 - (q.y - o.y) as i128 * (p.x - o.x) as i128
    };
    let d1 = cross(a, b);
    let d2 = cross(b, c);
    let d3 = cross(c, a);
    let has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    let has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    !(has_neg && has_pos)
}

pub fn in_any_circle(p: Point, circles: &[Circle]) -> bool {
    circles.iter().any(|c| c.contains(p))
}

pub fn in_any_triangle(p: Point, triangles: &[Triangle]) -> bool {
    triangles.iter().any(|t| point_in_triangle(p, t))
}

/// Largest `d` with `d^2 <= v`.
pub fn isqrt(v: u128) -> u128 {
    v.isqrt()
}

/// Floor length of each consecutive segment.
pub fn segment_lengths(trail: &[Point]) -> Vec<u128> {
    trail.windows(2).map(|w| isqrt(w[0].sq_dist(w[1]))).collect()
}

/// `(tot, cc)`: total trail length and the length of segments with both
/// endpoints inside some circle.
pub fn ev_totals(trail: &[Point], circles: &[Circle]) -> (u128, u128) {
    let inside: Vec<bool> = trail.iter().map(|&p| in_any_circle(p, circles)).collect();
    let mut tot = 0;
    let mut cc = 0;
    for (i, d) in segment_lengths(trail).into_iter().enumerate() {
        tot += d;
        if inside[i] && inside[i + 1] {
            cc += d;
        }
    }
    (tot, cc)
}

/// `(tot, hw)`: total trail length and the length of segments with both
/// endpoints inside the (untaxed) triangulation.
pub fn tax_totals(trail: &[Point], triangles: &[Triangle]) -> (u128, u128) {
    let inside: Vec<bool> = trail.iter().map(|&p| in_any_triangle(p, triangles)).collect();
    let mut tot = 0;
    let mut hw = 0;
    for (i, d) in segment_lengths(trail).into_iter().enumerate() {
        tot += d;
        if inside[i] && inside[i + 1] {
            hw += d;
        }
    }
    (tot, hw)
}

/// Subsidy policy verdict: `tot >= d_req` and `cc * 100 >= tot * P_req`.
pub fn oracle_ev(trail: &[Point], circles: &[Circle], policy: &SubsidyPolicy) -> bool {
    let (tot, cc) = ev_totals(trail, circles);
    tot >= policy.d_req as u128 && cc * 100 >= tot * policy.p_req as u128
}

/// Highway tax verdict: taxed distance `tot - hw` is at most `d_max`.
pub fn oracle_hwtax(trail: &[Point], triangles: &[Triangle], policy: &TaxPolicy) -> bool {
    let (tot, hw) = tax_totals(trail, triangles);
    tot - hw <= policy.d_max as u128
}

/// Plaintext Poseidon permutation, in place.
pub fn poseidon_permute(pp: &PoseidonParams, state: &mut [FieldElement]) -> Result<(), GadgetError> {
    let t = pp.t();
    if state.len() != t {
        return Err(GadgetError::WrongStateWidth { expected: t, got: state.len() });
    }
    let f = pp.field();
    let rc = pp.round_constants();
    let mut next = vec![FieldElement::ZERO; t];
    for r in 0..pp.rounds() {
        for (i, s) in state.iter_mut().enumerate() {
            *s = f.add(*s, rc[r * t + i]);
        }
        let boxed = if pp.is_full_round(r) { t } else { 1 };
        for s in &mut state[..boxed] {
            *s = f.pow(*s, pp.alpha() as u128);
        }
        for (i, row) in pp.mds().iter().enumerate() {
            next[i] = row.iter().zip(state.iter()).fold(FieldElement::ZERO, |acc, (&m, &s)| f.add(acc, f.mul(m, s)));
        }
        state.copy_from_slice(&next);
    }
    Ok(())
}

/// Plaintext sponge digest.
pub fn poseidon_hash(pp: &PoseidonParams, msg: &[FieldElement]) -> Result<FieldElement, GadgetError> {
    if msg.is_empty() {
        return Err(GadgetError::EmptyMessage);
    }
    let f = pp.field();
    let mut state = vec![FieldElement::ZERO; pp.t()];
    state[0] = f.from_signed(msg.len() as i128)?;
    for chunk in msg.chunks(pp.rate()) {
        for (j, &m) in chunk.iter().enumerate() {
            state[1 + j] = f.add(state[1 + j], m);
        }
        poseidon_permute(pp, &mut state)?;
    }
    Ok(state[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tri(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> Triangle {
        Triangle::new(a, b, c)
    }

    #[test]
    fn signed_area_examples() {
        assert_eq!(area_dbl_sgn(0, 0, 1, 0, 0, 1), 1);
        assert_eq!(area_dbl_sgn(0, 0, 0, 1, 1, 0), -1);
        assert_eq!(area_dbl_sgn(0, 0, 1, 1, 2, 2), 0);
    }

    #[test]
    fn bcoords_examples() {
        let t = tri((0, 0), (3, 0), (0, 3));
        let a = t.area_dbl_sgn();
        assert_eq!(a, 9);
        let c = get_bcoords(1, 1, &t).unwrap();
        assert_eq!((c.s, c.t, c.u(a)), (3, 3, 3));
        let v = get_bcoords(0, 0, &t).unwrap();
        assert_eq!((v.s, v.t, v.u(a)), (0, 0, 9));
        let o = get_bcoords(3, 3, &t).unwrap();
        assert_eq!((o.s, o.t, o.u(a)), (9, 9, -9));
        assert_eq!(get_bcoords(1, 1, &tri((0, 0), (1, 1), (2, 2))), Err(LocalError::DegenerateTriangle));
    }

    #[test]
    fn find_triangle_examples() {
        let tris = [tri((0, 0), (4, 0), (0, 4)), tri((4, 0), (4, 4), (0, 4)), tri((10, 10), (20, 10), (10, 20))];
        assert_eq!(find_triangle(12, 12, &tris), 3);
        assert_eq!(find_triangle(3, 3, &tris), 2);
        assert_eq!(find_triangle(100, 100, &tris), 1);
        // (2, 2) lies on the shared edge; the first triangle wins.
        assert_eq!(find_triangle(2, 2, &tris), 1);
        assert!(point_in_triangle(Point::new(2, 2), &tris[1]));
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(24), 4);
        assert_eq!(isqrt(25), 5);
        assert_eq!(isqrt(u128::MAX), u64::MAX as u128);
    }

    #[test]
    fn oracle_ev_examples() {
        let circles = [Circle::new(0, 0, 100)];
        let single = [Point::new(5, 5)];
        assert!(oracle_ev(&single, &circles, &SubsidyPolicy { d_req: 0, p_req: 100 }));

        let straight = [Point::new(0, 0), Point::new(10, 0)];
        assert!(oracle_ev(&straight, &circles, &SubsidyPolicy { d_req: 10, p_req: 100 }));

        let escaping = [Point::new(0, 0), Point::new(200, 0)];
        let (tot, cc) = ev_totals(&escaping, &circles);
        assert_eq!((tot, cc), (200, 0));
        assert!(!oracle_ev(&escaping, &circles, &SubsidyPolicy { d_req: 10, p_req: 100 }));
    }

    #[test]
    fn oracle_hwtax_examples() {
        // Untaxed region: everything except the band 10 < y < 20 of a 100x100 box.
        let tris = [
            tri((0, 0), (100, 0), (100, 10)),
            tri((0, 0), (100, 10), (0, 10)),
            tri((0, 20), (100, 20), (100, 100)),
            tri((0, 20), (100, 100), (0, 100)),
        ];
        let inside = [Point::new(1, 1), Point::new(50, 5), Point::new(60, 90)];
        // The segment (50,5)->(60,90) crosses the band, but only endpoints matter.
        assert!(oracle_hwtax(&inside[..2], &tris, &TaxPolicy { d_max: 0 }));

        let on_road = [Point::new(50, 5), Point::new(50, 15), Point::new(55, 15)];
        let (tot, hw) = tax_totals(&on_road, &tris);
        assert_eq!((tot, hw), (15, 0));
        let on_road = [Point::new(50, 15), Point::new(55, 15)];
        assert!(!oracle_hwtax(&on_road, &tris, &TaxPolicy { d_max: 4 }));
        assert!(oracle_hwtax(&on_road, &tris, &TaxPolicy { d_max: 5 }));
    }

    fn arb_point(bound: i64) -> impl Strategy<Value = Point> {
        (0..bound, 0..bound).prop_map(|(x, y)| Point::new(x, y))
    }

    fn arb_triangle(bound: i64) -> impl Strategy<Value = Triangle> {
        (arb_point(bound), arb_point(bound), arb_point(bound))
            .prop_map(|(a, b, c)| Triangle([a, b, c]))
            .prop_filter("non-degenerate", |t| t.area_dbl_sgn() != 0)
    }

    proptest! {
        #[test]
        fn reconstruction_identity(t in arb_triangle(1 << 20), p in arb_point(1 << 20)) {
            let c = get_bcoords(p.x, p.y, &t).unwrap();
            let a = t.area_dbl_sgn().abs();
            let u = c.u(a);
            let [v1, v2, v3] = t.0;
            prop_assert_eq!(u * v1.x as i128 + c.s * v2.x as i128 + c.t * v3.x as i128, p.x as i128 * a);
            prop_assert_eq!(u * v1.y as i128 + c.s * v2.y as i128 + c.t * v3.y as i128, p.y as i128 * a);
        }

        #[test]
        fn bcoord_signs_match_orientation_test(t in arb_triangle(64), p in arb_point(64)) {
            let c = get_bcoords(p.x, p.y, &t).unwrap();
            let u = c.u(t.area_dbl_sgn().abs());
            prop_assert_eq!(c.s >= 0 && c.t >= 0 && u >= 0, point_in_triangle(p, &t));
        }

        #[test]
        fn find_triangle_agrees_with_orientation_test(
            tris in proptest::collection::vec(arb_triangle(16), 1..5),
        ) {
            // Exhaustive over the lattice of the fixture's bounding box.
            for x in -1..17 {
                for y in -1..17 {
                    let p = Point::new(x, y);
                    let j = find_triangle(x, y, &tris);
                    let first = tris.iter().position(|t| point_in_triangle(p, t));
                    match first {
                        Some(i) => prop_assert_eq!(j, i + 1),
                        None => prop_assert_eq!(j, 1),
                    }
                }
            }
        }
    }
}
