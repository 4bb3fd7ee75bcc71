use crate::circuit::{ConstraintSystem, Domain, Wire};
use crate::field::FieldElement;
use crate::gadgets::{and, assert_leq, characteristic_vector, check_inside_triangle, lookup_with_selector, SqrtMode};
use crate::localcalc::{find_triangle, get_bcoords, BaryCoords};

use super::{
    segment_length, wire_trail, BuiltStatement, Geometry, InstanceError, Policy, ProverStrategy, StatementInstance,
};

/// Highway tax: the distance driven between points not both inside the
/// off-road triangulation, `tot - hw`, is at most `d_max`.
///
/// Each point's triangle is selected obliviously. One selector vector picks
/// all six vertex coordinates so they come from the same triangle; a wrong
/// index can only make the membership test fail, which raises the taxed
/// distance. Segment roots are checked from above only, for the same reason.
pub fn build_highway_tax(
    inst: &StatementInstance,
    strategy: &dyn ProverStrategy,
) -> Result<BuiltStatement, InstanceError> {
    build_highway_tax_with_mode(inst, strategy, TAX_SQRT_MODE)
}

pub const TAX_SQRT_MODE: SqrtMode = SqrtMode::UpperOnly;

pub fn build_highway_tax_with_mode(
    inst: &StatementInstance,
    strategy: &dyn ProverStrategy,
    mode: SqrtMode,
) -> Result<BuiltStatement, InstanceError> {
    inst.validate()?;
    let ad = &inst.ad;
    let (Policy::Tax(_), Geometry::Triangles { triangles, .. }) = (&ad.policy, &ad.geometry) else {
        return Err(InstanceError::KindMismatch);
    };
    let f = ad.params.field();
    let k = ad.params.coord_bits();
    let mut cs = ConstraintSystem::new(f);

    let shared = ad.expected_shared_inputs(inst.h_ex);
    let shared_inputs = shared.iter().map(|&v| cs.wire_input(v, Domain::Shared)).collect::<Result<Vec<_>, _>>()?;
    let n = triangles.len();
    let h = shared_inputs[0];
    let xs = &shared_inputs[1..1 + 3 * n];
    let ys = &shared_inputs[1 + 3 * n..1 + 6 * n];
    let d_max = shared_inputs[1 + 6 * n];
    let rows: Vec<Vec<Wire>> = (0..n)
        .map(|j| {
            let mut r = xs[3 * j..3 * j + 3].to_vec();
            r.extend_from_slice(&ys[3 * j..3 * j + 3]);
            r
        })
        .collect();

    let points = wire_trail(&mut cs, inst, h)?;
    let padded = inst.trail.padded(ad.n_traj);

    let mut inside = Vec::with_capacity(points.len());
    for (i, (&(x, y), p)) in points.iter().zip(&padded).enumerate() {
        let t = strategy.triangle_index(i, find_triangle(p.x, p.y, triangles));
        let sel = characteristic_vector(&mut cs, Some(t), n, None)?;
        let v = lookup_with_selector(&mut cs, &sel, &rows)?;
        let bc = match t.checked_sub(1).and_then(|j| triangles.get(j)) {
            Some(tri) => {
                strategy.bcoords(i, get_bcoords(p.x, p.y, tri).expect("validated triangles are non-degenerate"))
            }
            None => BaryCoords { s: 0, t: 0 },
        };
        let c = check_inside_triangle(&mut cs, [v[0], v[1], v[2]], [v[3], v[4], v[5]], x, y, Some(bc), k)?;
        inside.push(c);
    }

    let mut tot = cs.constant(FieldElement::ZERO);
    let mut hw = tot;
    for i in 1..points.len() {
        let d = segment_length(&mut cs, inst, strategy, i - 1, points[i - 1], points[i], mode)?;
        tot = cs.add(tot, d)?;
        let both = and(&mut cs, inside[i - 1], inside[i])?;
        let hw_plus = cs.add(hw, d)?;
        hw = cs.oblivious_choice(both, hw_plus, hw)?;
    }
    let taxed = cs.sub(tot, hw)?;
    assert_leq(&mut cs, taxed, d_max, ad.params.ledger().policy_bits())?;
    Ok(BuiltStatement { cs, shared_inputs })
}
