use crate::circuit::{ConstraintSystem, Domain};
use crate::field::FieldElement;
use crate::gadgets::{and, assert_leq, check_inside, SqrtMode};

use super::{
    segment_length, wire_trail, BuiltStatement, Geometry, InstanceError, Policy, ProverStrategy, StatementInstance,
};

/// EV subsidy: the trail is at least `d_req` long and at least `P_req`
/// percent of it runs between points that both lie in some circle.
///
/// Segment roots are checked on both sides by default ([`EV_SQRT_MODE`]).
/// Checking only `d^2 <= sq` stops overstated lengths but lets the prover
/// shorten segments outside the circles, which lowers `tot` without
/// touching `cc` and so inflates the in-circle percentage.
pub fn build_ev_subsidy(
    inst: &StatementInstance,
    strategy: &dyn ProverStrategy,
) -> Result<BuiltStatement, InstanceError> {
    build_ev_subsidy_with_mode(inst, strategy, EV_SQRT_MODE)
}

pub const EV_SQRT_MODE: SqrtMode = SqrtMode::Both;

pub fn build_ev_subsidy_with_mode(
    inst: &StatementInstance,
    strategy: &dyn ProverStrategy,
    mode: SqrtMode,
) -> Result<BuiltStatement, InstanceError> {
    inst.validate()?;
    let ad = &inst.ad;
    let (Policy::Subsidy(policy), Geometry::Circles(circles)) = (&ad.policy, &ad.geometry) else {
        return Err(InstanceError::KindMismatch);
    };
    let f = ad.params.field();
    let k = ad.params.coord_bits();
    let mut cs = ConstraintSystem::new(f);

    let shared = ad.expected_shared_inputs(inst.h_ex);
    let shared_inputs = shared.iter().map(|&v| cs.wire_input(v, Domain::Shared)).collect::<Result<Vec<_>, _>>()?;
    let n = circles.len();
    let h = shared_inputs[0];
    let u = &shared_inputs[1..1 + n];
    let v = &shared_inputs[1 + n..1 + 2 * n];
    let s = &shared_inputs[1 + 2 * n..1 + 3 * n];
    let d_req = shared_inputs[1 + 3 * n];
    let p_req = shared_inputs[2 + 3 * n];
    debug_assert_eq!(policy.p_req, cs.hint(p_req).unwrap().value() as u64);

    let points = wire_trail(&mut cs, inst, h)?;

    let mut tot = cs.constant(FieldElement::ZERO);
    let mut cc = tot;
    let mut prev_in = check_inside(&mut cs, u, v, s, points[0].0, points[0].1, k)?;
    for i in 1..points.len() {
        let d = segment_length(&mut cs, inst, strategy, i - 1, points[i - 1], points[i], mode)?;
        tot = cs.add(tot, d)?;
        let b_in = check_inside(&mut cs, u, v, s, points[i].0, points[i].1, k)?;
        let both = and(&mut cs, prev_in, b_in)?;
        let cc_plus = cs.add(cc, d)?;
        cc = cs.oblivious_choice(both, cc_plus, cc)?;
        prev_in = b_in;
    }

    let width = ad.params.ledger().policy_bits();
    assert_leq(&mut cs, d_req, tot, width)?;
    let lhs = cs.mul(tot, p_req)?;
    let rhs = cs.scale(cc, f.from_u64(100))?;
    assert_leq(&mut cs, lhs, rhs, width)?;
    Ok(BuiltStatement { cs, shared_inputs })
}
