//! The two location statements: EV subsidy and highway tax.
//!
//! Both statements bind a prover-only trail to a shared hash, measure the
//! trail segment by segment with integer square roots, and classify each
//! segment by whether both endpoints lie in the shared geometry (circles
//! for the subsidy, an off-road triangulation for the tax).
//!
//! Trails are padded to the public length `n_traj` by repeating the last
//! real point. Padded segments have length zero, so padding never changes
//! `tot`, `cc` or `hw`, while the hashed vector hides the real length.

mod ev;
mod tax;

pub use ev::{build_ev_subsidy, build_ev_subsidy_with_mode, EV_SQRT_MODE};
pub use tax::{build_highway_tax, build_highway_tax_with_mode, TAX_SQRT_MODE};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitError, ConstraintSystem, Counters, SatisfactionReport, Wire};
use crate::field::{FieldElement, FieldParams};
use crate::gadgets::{GadgetError, PoseidonParams};
use crate::geometry::{Circle, Point, Rect, Triangle};
use crate::localcalc::{self, BaryCoords};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsidyPolicy {
    pub d_req: u64,
    /// Required percentage, `0..=100`.
    pub p_req: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaxPolicy {
    pub d_max: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementKind {
    Ev,
    Tax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    Subsidy(SubsidyPolicy),
    Tax(TaxPolicy),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    Circles(Vec<Circle>),
    /// Off-road triangulation, plus the map region the trail must stay in.
    /// Points inside `region` but outside every triangle are on the road.
    Triangles {
        triangles: Vec<Triangle>,
        region: Option<Rect>,
    },
}

impl Geometry {
    pub fn len(&self) -> usize {
        match self {
            Geometry::Circles(c) => c.len(),
            Geometry::Triangles { triangles, .. } => triangles.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Real trail points, before padding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Trail {
    pub points: Vec<Point>,
}

impl Trail {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn declared_len(&self) -> usize {
        self.points.len()
    }

    /// The trail extended to `n` points by repeating the last one.
    pub fn padded(&self, n: usize) -> Vec<Point> {
        let mut out = self.points.clone();
        if let Some(&last) = out.last() {
            out.resize(n.max(out.len()), last);
        }
        out
    }
}

impl From<Vec<Point>> for Trail {
    fn from(points: Vec<Point>) -> Self {
        Self { points }
    }
}

/// Everything the Verifier knows about a statement: public parameters and
/// shared inputs other than the trail hash.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthorityData {
    pub params: FieldParams,
    pub pp: PoseidonParams,
    pub n_traj: usize,
    pub policy: Policy,
    pub geometry: Geometry,
}

impl AuthorityData {
    pub fn kind(&self) -> StatementKind {
        match self.policy {
            Policy::Subsidy(_) => StatementKind::Ev,
            Policy::Tax(_) => StatementKind::Tax,
        }
    }

    /// Map region for the tax statement: the explicit one, or the bounding
    /// box of all triangle vertices.
    pub fn region(&self) -> Option<Rect> {
        match &self.geometry {
            Geometry::Circles(_) => None,
            Geometry::Triangles { region: Some(r), .. } => Some(*r),
            Geometry::Triangles { triangles, region: None } => {
                let pts = triangles.iter().flat_map(|t| t.0);
                let mut r: Option<Rect> = None;
                for p in pts {
                    r = Some(match r {
                        None => Rect::new(p.x, p.y, p.x, p.y),
                        Some(r) => Rect::new(r.x0.min(p.x), r.y0.min(p.y), r.x1.max(p.x), r.y1.max(p.y)),
                    });
                }
                r
            }
        }
    }

    /// Checks every invariant that does not involve the trail.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let k = self.params.coord_bits();
        let ledger = self.params.ledger();
        if self.pp.field() != self.params.field() {
            return Err(InstanceError::FieldMismatch);
        }
        if self.n_traj == 0 || self.n_traj > ledger.max_traj() {
            return Err(InstanceError::TrajSize { n_traj: self.n_traj, max: ledger.max_traj() });
        }
        if self.geometry.is_empty() {
            return Err(InstanceError::EmptyGeometry);
        }
        let coord = |what: &'static str, v: i64| check_coord(what, v, k);
        let policy_max = 1u128 << ledger.policy_bits();
        match (&self.policy, &self.geometry) {
            (Policy::Subsidy(p), Geometry::Circles(circles)) => {
                if p.p_req > 100 {
                    return Err(InstanceError::Percentage(p.p_req));
                }
                if p.d_req as u128 >= policy_max {
                    return Err(InstanceError::PolicyRange { what: "d_req", value: p.d_req });
                }
                for c in circles {
                    coord("circle center x", c.center.x)?;
                    coord("circle center y", c.center.y)?;
                    if c.radius <= 0 {
                        return Err(InstanceError::CoordRange { what: "radius", value: c.radius, bits: k });
                    }
                    coord("radius", c.radius)?;
                }
            }
            (Policy::Tax(p), Geometry::Triangles { triangles, region }) => {
                if p.d_max as u128 >= policy_max {
                    return Err(InstanceError::PolicyRange { what: "d_max", value: p.d_max });
                }
                for (i, t) in triangles.iter().enumerate() {
                    for v in t.0 {
                        coord("triangle vertex x", v.x)?;
                        coord("triangle vertex y", v.y)?;
                    }
                    if t.area_dbl_sgn() <= 0 {
                        return Err(InstanceError::Orientation(i));
                    }
                }
                if let Some(r) = region {
                    for v in [r.x0, r.y0, r.x1, r.y1] {
                        coord("region corner", v)?;
                    }
                }
            }
            _ => return Err(InstanceError::KindMismatch),
        }
        Ok(())
    }

    /// Checks a trail against these parameters, including the tax
    /// statement's requirement that every point lies in the map region.
    pub fn validate_trail(&self, trail: &Trail) -> Result<(), InstanceError> {
        let k = self.params.coord_bits();
        if trail.points.is_empty() {
            return Err(InstanceError::EmptyTrail);
        }
        if trail.points.len() > self.n_traj {
            return Err(InstanceError::TrailTooLong { len: trail.points.len(), n_traj: self.n_traj });
        }
        for p in &trail.points {
            check_coord("trail x", p.x, k)?;
            check_coord("trail y", p.y, k)?;
        }
        if let (Some(region), Geometry::Triangles { triangles, .. }) = (self.region(), &self.geometry) {
            for (i, &p) in trail.points.iter().enumerate() {
                if !region.contains(p) && !localcalc::in_any_triangle(p, triangles) {
                    return Err(InstanceError::OutsideMap(i));
                }
            }
        }
        Ok(())
    }

    /// Shared input values in the order the builders create them:
    /// subsidy `h, u.., v.., r^2.., d_req, P_req`; tax `h, X.., Y.., d_max`
    /// with `X`, `Y` listed triangle by triangle.
    pub fn expected_shared_inputs(&self, h: FieldElement) -> Vec<FieldElement> {
        let f = self.params.field();
        let int = |v: i64| f.from_signed(v as i128).expect("validated coordinates are small");
        let mut out = vec![h];
        match (&self.policy, &self.geometry) {
            (Policy::Subsidy(p), Geometry::Circles(circles)) => {
                out.extend(circles.iter().map(|c| int(c.center.x)));
                out.extend(circles.iter().map(|c| int(c.center.y)));
                out.extend(circles.iter().map(|c| int(c.radius * c.radius)));
                out.push(f.from_u64(p.d_req));
                out.push(f.from_u64(p.p_req));
            }
            (Policy::Tax(p), Geometry::Triangles { triangles, .. }) => {
                out.extend(triangles.iter().flat_map(|t| t.0.map(|v| int(v.x))));
                out.extend(triangles.iter().flat_map(|t| t.0.map(|v| int(v.y))));
                out.push(f.from_u64(p.d_max));
            }
            _ => {}
        }
        out
    }

    /// Poseidon digest of the padded trail, `x` coordinates then `y`.
    pub fn trail_digest(&self, trail: &Trail) -> Result<FieldElement, InstanceError> {
        digest_trail(&self.pp, self.n_traj, trail)
    }

    /// Plaintext policy verdict for `trail`.
    pub fn oracle(&self, trail: &Trail) -> bool {
        let pts = &trail.points;
        match (&self.policy, &self.geometry) {
            (Policy::Subsidy(p), Geometry::Circles(c)) => localcalc::oracle_ev(pts, c, p),
            (Policy::Tax(p), Geometry::Triangles { triangles, .. }) => localcalc::oracle_hwtax(pts, triangles, p),
            _ => false,
        }
    }
}

/// Poseidon digest of `trail` padded to `n_traj` points: all `x`
/// coordinates, then all `y` coordinates.
pub fn digest_trail(pp: &PoseidonParams, n_traj: usize, trail: &Trail) -> Result<FieldElement, InstanceError> {
    if trail.points.is_empty() {
        return Err(InstanceError::EmptyTrail);
    }
    if trail.points.len() > n_traj {
        return Err(InstanceError::TrailTooLong { len: trail.points.len(), n_traj });
    }
    let f = pp.field();
    let padded = trail.padded(n_traj);
    let mut msg: Vec<FieldElement> = Vec::with_capacity(2 * padded.len());
    for p in &padded {
        msg.push(f.from_signed(p.x as i128)?);
    }
    for p in &padded {
        msg.push(f.from_signed(p.y as i128)?);
    }
    Ok(pp.hash(&msg)?)
}

fn check_coord(what: &'static str, v: i64, bits: u32) -> Result<(), InstanceError> {
    if v < 0 || v >= 1i64 << bits {
        return Err(InstanceError::CoordRange { what, value: v, bits });
    }
    Ok(())
}

/// A complete statement: authority data, the shared trail hash and the
/// prover's trail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatementInstance {
    pub ad: AuthorityData,
    pub h_ex: FieldElement,
    pub trail: Trail,
}

impl StatementInstance {
    /// Instance whose `h_ex` is the honest digest of `trail`.
    pub fn new(ad: AuthorityData, trail: Trail) -> Result<Self, InstanceError> {
        ad.validate()?;
        ad.validate_trail(&trail)?;
        let h_ex = ad.trail_digest(&trail)?;
        Ok(Self { ad, h_ex, trail })
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        self.ad.validate()?;
        self.ad.validate_trail(&self.trail)
    }

    pub fn kind(&self) -> StatementKind {
        self.ad.kind()
    }

    pub fn oracle(&self) -> bool {
        self.ad.oracle(&self.trail)
    }

    /// Same statement with a different trail but the original hash.
    pub fn with_trail(&self, trail: Trail) -> Self {
        Self { trail, ..self.clone() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("trail is empty")]
    EmptyTrail,
    #[error("trail has {len} points but n_traj is {n_traj}")]
    TrailTooLong { len: usize, n_traj: usize },
    #[error("n_traj = {n_traj} outside 1..={max}")]
    TrajSize { n_traj: usize, max: usize },
    #[error("{what} = {value} outside [0, 2^{bits})")]
    CoordRange { what: &'static str, value: i64, bits: u32 },
    #[error("percentage {0} exceeds 100")]
    Percentage(u64),
    #[error("{what} = {value} exceeds the comparison range")]
    PolicyRange { what: &'static str, value: u64 },
    #[error("triangle {0} is degenerate or clockwise")]
    Orientation(usize),
    #[error("policy and geometry belong to different statements")]
    KindMismatch,
    #[error("no circles or triangles")]
    EmptyGeometry,
    #[error("trail point {0} lies outside the map region and every triangle")]
    OutsideMap(usize),
    #[error("Poseidon parameters use a different field")]
    FieldMismatch,
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

impl From<CircuitError> for InstanceError {
    fn from(e: CircuitError) -> Self {
        InstanceError::Gadget(GadgetError::Circuit(e))
    }
}

/// Prover-side choices the builders make. The honest strategy follows the
/// local computations; overrides model cheating provers.
pub trait ProverStrategy {
    /// Root supplied for segment `seg` (between points `seg` and `seg + 1`).
    fn segment_length(&self, _seg: usize, honest: u128) -> u128 {
        honest
    }

    /// 1-based triangle index supplied for point `point` (tax only).
    fn triangle_index(&self, _point: usize, honest: usize) -> usize {
        honest
    }

    /// Barycentric coordinates supplied for point `point` (tax only).
    fn bcoords(&self, _point: usize, honest: BaryCoords) -> BaryCoords {
        honest
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Honest;

impl ProverStrategy for Honest {}

/// A built statement circuit and its shared input wires, in the order of
/// [`AuthorityData::expected_shared_inputs`].
#[derive(Clone, Debug)]
pub struct BuiltStatement {
    pub cs: ConstraintSystem,
    pub shared_inputs: Vec<Wire>,
}

impl BuiltStatement {
    pub fn check(&mut self) -> Result<SatisfactionReport, CircuitError> {
        self.cs.evaluate_and_check()
    }
}

/// Builds the circuit for either statement.
pub fn build(inst: &StatementInstance, strategy: &dyn ProverStrategy) -> Result<BuiltStatement, InstanceError> {
    match inst.kind() {
        StatementKind::Ev => build_ev_subsidy(inst, strategy),
        StatementKind::Tax => build_highway_tax(inst, strategy),
    }
}

/// Builds with the honest strategy and checks satisfiability.
pub fn check(inst: &StatementInstance) -> Result<SatisfactionReport, InstanceError> {
    let mut built = build(inst, &Honest)?;
    Ok(built.check()?)
}

/// Counters of a statement with the given sizes, built on a dummy witness.
pub fn statement_cost(
    kind: StatementKind,
    n_traj: usize,
    n_geo: usize,
    params: FieldParams,
    pp: &PoseidonParams,
) -> Result<Counters, InstanceError> {
    let (policy, geometry) = match kind {
        StatementKind::Ev => {
            (Policy::Subsidy(SubsidyPolicy::default()), Geometry::Circles(vec![Circle::new(0, 0, 1); n_geo]))
        }
        StatementKind::Tax => (
            Policy::Tax(TaxPolicy::default()),
            Geometry::Triangles { triangles: vec![Triangle::new((0, 0), (1, 0), (0, 1)); n_geo], region: None },
        ),
    };
    let ad = AuthorityData { params, pp: pp.clone(), n_traj, policy, geometry };
    let inst = StatementInstance::new(ad, Trail::new(vec![Point::new(0, 0)]))?;
    Ok(build(&inst, &Honest)?.cs.counters())
}

/// Wires the padded trail as prover-only inputs, range-checks every
/// coordinate to `k_c` bits and asserts its digest equals the shared `h`.
fn wire_trail(
    cs: &mut ConstraintSystem,
    inst: &StatementInstance,
    h: Wire,
) -> Result<Vec<(Wire, Wire)>, InstanceError> {
    let f = cs.field();
    let k = inst.ad.params.coord_bits();
    let padded = inst.trail.padded(inst.ad.n_traj);
    let mut xs = Vec::with_capacity(padded.len());
    let mut ys = Vec::with_capacity(padded.len());
    for p in &padded {
        xs.push(cs.wire_input(f.from_signed(p.x as i128)?, crate::circuit::Domain::ProverOnly)?);
    }
    for p in &padded {
        ys.push(cs.wire_input(f.from_signed(p.y as i128)?, crate::circuit::Domain::ProverOnly)?);
    }
    for &w in xs.iter().chain(&ys) {
        crate::gadgets::range_check(cs, w, k)?;
    }
    let msg: Vec<Wire> = xs.iter().chain(&ys).copied().collect();
    let digest = crate::gadgets::poseidon_hash(cs, &msg, &inst.ad.pp)?;
    cs.assert_eq(digest, h)?;
    Ok(xs.into_iter().zip(ys).collect())
}

/// Accumulates one segment: the prover's root of the squared distance
/// between consecutive points, with the given one-sided check.
fn segment_length(
    cs: &mut ConstraintSystem,
    inst: &StatementInstance,
    strategy: &dyn ProverStrategy,
    seg: usize,
    a: (Wire, Wire),
    b: (Wire, Wire),
    mode: crate::gadgets::SqrtMode,
) -> Result<Wire, InstanceError> {
    let f = cs.field();
    let dx = cs.sub(b.0, a.0)?;
    let dy = cs.sub(b.1, a.1)?;
    let dx2 = cs.mul(dx, dx)?;
    let dy2 = cs.mul(dy, dy)?;
    let sq = cs.add(dx2, dy2)?;
    let d = cs.hint(sq).map(|v| f.elem(strategy.segment_length(seg, localcalc::isqrt(v.value()))));
    let half = inst.ad.params.ledger().sqrt_half_bits();
    Ok(crate::gadgets::sqrt_floor_with(cs, sq, half, mode, d)?)
}
