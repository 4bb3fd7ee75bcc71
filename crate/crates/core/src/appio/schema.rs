use std::fmt::{self, Display};
use std::marker::PhantomData;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::field::{FieldElement, FieldParams, DEFAULT_COORD_BITS, DEFAULT_MODULUS};
use crate::gadgets::poseidon::PoseidonDoc;
use crate::gadgets::PoseidonParams;
use crate::geometry::{Circle, Point, Rect, Triangle};
use crate::statements::{
    AuthorityData, Geometry, InstanceError, Policy, StatementInstance, StatementKind, SubsidyPolicy, TaxPolicy, Trail,
};

use super::AppioError;

pub const SCHEMA_VERSION: u32 = 1;

/// Integer written as a decimal string; numbers are accepted on input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Dec<T>(pub T);

impl<T: Display> Serialize for Dec<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

struct DecVisitor<T>(PhantomData<T>);

impl<T> Visitor<'_> for DecVisitor<T>
where
    T: FromStr + TryFrom<i128>,
    <T as FromStr>::Err: Display,
{
    type Value = Dec<T>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal string")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Dec<T>, E> {
        v.trim().parse().map(Dec).map_err(|e| E::custom(format!("{v:?}: {e}")))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Dec<T>, E> {
        T::try_from(v as i128).map(Dec).map_err(|_| E::custom(format!("{v} out of range")))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Dec<T>, E> {
        T::try_from(v as i128).map(Dec).map_err(|_| E::custom(format!("{v} out of range")))
    }
}

impl<'de, T> Deserialize<'de> for Dec<T>
where
    T: FromStr + TryFrom<i128>,
    <T as FromStr>::Err: Display,
{
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(DecVisitor(PhantomData))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParamsDoc {
    pub modulus: Dec<u128>,
    pub coord_bits: Dec<u32>,
}

impl Default for FieldParamsDoc {
    fn default() -> Self {
        Self { modulus: Dec(DEFAULT_MODULUS), coord_bits: Dec(DEFAULT_COORD_BITS) }
    }
}

impl FieldParamsDoc {
    pub fn to_params(&self) -> Result<FieldParams, AppioError> {
        FieldParams::new(self.modulus.0, self.coord_bits.0).map_err(|e| AppioError::invalid("/field_params", e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizesDoc {
    pub n_traj: Dec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_circ: Option<Dec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tri: Option<Dec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_req: Option<Dec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_req: Option<Dec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<Dec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleDoc {
    pub u: Dec<i64>,
    pub v: Dec<i64>,
    pub r: Dec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectDoc {
    pub x0: Dec<i64>,
    pub y0: Dec<i64>,
    pub x1: Dec<i64>,
    pub y1: Dec<i64>,
}

type PointDoc = [Dec<i64>; 2];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circles: Option<Vec<CircleDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangles: Option<Vec<[PointDoc; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RectDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub schema_version: Dec<u32>,
    pub kind: StatementKind,
    #[serde(default)]
    pub field_params: FieldParamsDoc,
    #[serde(default)]
    pub poseidon: PoseidonDoc,
    pub sizes: SizesDoc,
    pub policy: PolicyDoc,
    pub geometry: GeometryDoc,
    /// Expected trail digest; computed from the trail when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_ex: Option<Dec<u128>>,
    pub trail: Vec<PointDoc>,
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<StatementInstance, AppioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: InstanceDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        let inner = e.into_inner();
        AppioError::Schema { pointer, line: inner.line(), column: inner.column(), msg: inner.to_string() }
    })?;
    instance_from_doc(&doc)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<StatementInstance, AppioError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| AppioError::Io { path: path.display().to_string(), source })?;
    parse_instance(&text)
}

pub fn save_instance(path: impl AsRef<Path>, inst: &StatementInstance) -> Result<(), AppioError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(&instance_to_doc(inst)).expect("documents always serialize");
    std::fs::write(path, text + "\n").map_err(|source| AppioError::Io { path: path.display().to_string(), source })
}

fn point(doc: &PointDoc) -> Point {
    Point::new(doc[0].0, doc[1].0)
}

fn check_coord(pointer: String, v: i64, bits: u32) -> Result<(), AppioError> {
    if v < 0 || v >= 1i64 << bits {
        return Err(AppioError::invalid(pointer, format!("{v} outside [0, 2^{bits})")));
    }
    Ok(())
}

fn check_point(pointer: &str, p: &PointDoc, bits: u32) -> Result<(), AppioError> {
    check_coord(format!("{pointer}/0"), p[0].0, bits)?;
    check_coord(format!("{pointer}/1"), p[1].0, bits)
}

fn require<T: Copy>(v: &Option<Dec<T>>, pointer: &str) -> Result<T, AppioError> {
    v.map(|d| d.0).ok_or_else(|| AppioError::invalid(pointer, "required for this statement kind"))
}

fn forbid<T>(v: &Option<T>, pointer: &str) -> Result<(), AppioError> {
    match v {
        Some(_) => Err(AppioError::invalid(pointer, "not allowed for this statement kind")),
        None => Ok(()),
    }
}

/// Converts a parsed document into a validated instance. Clockwise
/// triangles are re-oriented by swapping their second and third vertices.
pub fn instance_from_doc(doc: &InstanceDoc) -> Result<StatementInstance, AppioError> {
    if doc.schema_version.0 != SCHEMA_VERSION {
        return Err(AppioError::invalid(
            "/schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", doc.schema_version.0),
        ));
    }
    let params = doc.field_params.to_params()?;
    let k = params.coord_bits();
    let pp =
        PoseidonParams::from_doc(params.field(), &doc.poseidon).map_err(|e| AppioError::invalid("/poseidon", e))?;
    let n_traj = doc.sizes.n_traj.0;

    let (policy, geometry) = match doc.kind {
        StatementKind::Ev => {
            forbid(&doc.policy.d_max, "/policy/d_max")?;
            forbid(&doc.sizes.n_tri, "/sizes/n_tri")?;
            forbid(&doc.geometry.triangles, "/geometry/triangles")?;
            forbid(&doc.geometry.region, "/geometry/region")?;
            let policy = SubsidyPolicy {
                d_req: require(&doc.policy.d_req, "/policy/d_req")?,
                p_req: require(&doc.policy.p_req, "/policy/p_req")?,
            };
            if policy.p_req > 100 {
                return Err(AppioError::invalid("/policy/p_req", "percentage above 100"));
            }
            let docs = doc
                .geometry
                .circles
                .as_ref()
                .ok_or_else(|| AppioError::invalid("/geometry/circles", "required for this statement kind"))?;
            let mut circles = Vec::with_capacity(docs.len());
            for (i, c) in docs.iter().enumerate() {
                check_coord(format!("/geometry/circles/{i}/u"), c.u.0, k)?;
                check_coord(format!("/geometry/circles/{i}/v"), c.v.0, k)?;
                check_coord(format!("/geometry/circles/{i}/r"), c.r.0, k)?;
                if c.r.0 == 0 {
                    return Err(AppioError::invalid(format!("/geometry/circles/{i}/r"), "radius must be positive"));
                }
                circles.push(Circle::new(c.u.0, c.v.0, c.r.0));
            }
            let n_circ = require(&doc.sizes.n_circ, "/sizes/n_circ")?;
            if n_circ != circles.len() {
                return Err(AppioError::invalid(
                    "/sizes/n_circ",
                    format!("{n_circ} does not match {} circles", circles.len()),
                ));
            }
            (Policy::Subsidy(policy), Geometry::Circles(circles))
        }
        StatementKind::Tax => {
            forbid(&doc.policy.d_req, "/policy/d_req")?;
            forbid(&doc.policy.p_req, "/policy/p_req")?;
            forbid(&doc.sizes.n_circ, "/sizes/n_circ")?;
            forbid(&doc.geometry.circles, "/geometry/circles")?;
            let policy = TaxPolicy { d_max: require(&doc.policy.d_max, "/policy/d_max")? };
            let docs = doc
                .geometry
                .triangles
                .as_ref()
                .ok_or_else(|| AppioError::invalid("/geometry/triangles", "required for this statement kind"))?;
            let mut triangles = Vec::with_capacity(docs.len());
            for (i, t) in docs.iter().enumerate() {
                for (j, v) in t.iter().enumerate() {
                    check_point(&format!("/geometry/triangles/{i}/{j}"), v, k)?;
                }
                let tri = Triangle::new(point(&t[0]), point(&t[1]), point(&t[2]));
                triangles.push(match tri.area_dbl_sgn() {
                    0 => return Err(AppioError::invalid(format!("/geometry/triangles/{i}"), "degenerate triangle")),
                    a if a < 0 => tri.flipped(),
                    _ => tri,
                });
            }
            let region = match &doc.geometry.region {
                Some(r) => {
                    for (name, v) in [("x0", r.x0), ("y0", r.y0), ("x1", r.x1), ("y1", r.y1)] {
                        check_coord(format!("/geometry/region/{name}"), v.0, k)?;
                    }
                    Some(Rect::new(r.x0.0, r.y0.0, r.x1.0, r.y1.0))
                }
                None => None,
            };
            let n_tri = require(&doc.sizes.n_tri, "/sizes/n_tri")?;
            if n_tri != triangles.len() {
                return Err(AppioError::invalid(
                    "/sizes/n_tri",
                    format!("{n_tri} does not match {} triangles", triangles.len()),
                ));
            }
            (Policy::Tax(policy), Geometry::Triangles { triangles, region })
        }
    };

    if doc.trail.is_empty() {
        return Err(AppioError::invalid("/trail", "trail is empty"));
    }
    if doc.trail.len() > n_traj {
        return Err(AppioError::invalid("/trail", format!("{} points exceed n_traj = {n_traj}", doc.trail.len())));
    }
    for (i, p) in doc.trail.iter().enumerate() {
        check_point(&format!("/trail/{i}"), p, k)?;
    }
    let trail = Trail::new(doc.trail.iter().map(point).collect());
    let ad = AuthorityData { params, pp, n_traj, policy, geometry };
    ad.validate().map_err(|e| match e {
        InstanceError::TrajSize { .. } => AppioError::invalid("/sizes/n_traj", e),
        InstanceError::PolicyRange { what, .. } => AppioError::invalid(format!("/policy/{what}"), e),
        InstanceError::EmptyGeometry => AppioError::invalid("/geometry", e),
        e => AppioError::invalid("", e),
    })?;
    ad.validate_trail(&trail).map_err(|e| match e {
        InstanceError::OutsideMap(i) => AppioError::invalid(format!("/trail/{i}"), e),
        e => AppioError::invalid("/trail", e),
    })?;
    let h_ex = match doc.h_ex {
        Some(Dec(h)) => params.field().checked_elem(h).map_err(|e| AppioError::invalid("/h_ex", e))?,
        None => ad.trail_digest(&trail).map_err(|e| AppioError::invalid("/trail", e))?,
    };
    Ok(StatementInstance { ad, h_ex, trail })
}

fn point_doc(p: Point) -> PointDoc {
    [Dec(p.x), Dec(p.y)]
}

/// Seed-only form unless the constants differ from their derivation.
fn poseidon_doc(pp: &PoseidonParams) -> PoseidonDoc {
    let derived = PoseidonParams::derive(pp.field(), pp.seed(), pp.t(), pp.alpha(), pp.r_full(), pp.r_partial());
    pp.to_doc(derived.as_ref() != Ok(pp))
}

/// Document for an instance; `h_ex` is always written out.
pub fn instance_to_doc(inst: &StatementInstance) -> InstanceDoc {
    let ad = &inst.ad;
    let (policy, sizes, geometry) = match (&ad.policy, &ad.geometry) {
        (Policy::Subsidy(p), Geometry::Circles(c)) => (
            PolicyDoc { d_req: Some(Dec(p.d_req)), p_req: Some(Dec(p.p_req)), d_max: None },
            SizesDoc { n_traj: Dec(ad.n_traj), n_circ: Some(Dec(c.len())), n_tri: None },
            GeometryDoc {
                circles: Some(
                    c.iter().map(|c| CircleDoc { u: Dec(c.center.x), v: Dec(c.center.y), r: Dec(c.radius) }).collect(),
                ),
                triangles: None,
                region: None,
            },
        ),
        (Policy::Tax(p), Geometry::Triangles { triangles, region }) => (
            PolicyDoc { d_req: None, p_req: None, d_max: Some(Dec(p.d_max)) },
            SizesDoc { n_traj: Dec(ad.n_traj), n_circ: None, n_tri: Some(Dec(triangles.len())) },
            GeometryDoc {
                circles: None,
                triangles: Some(triangles.iter().map(|t| t.0.map(point_doc)).collect()),
                region: region.map(|r| RectDoc { x0: Dec(r.x0), y0: Dec(r.y0), x1: Dec(r.x1), y1: Dec(r.y1) }),
            },
        ),
        _ => unreachable!("validated instances pair policy and geometry"),
    };
    InstanceDoc {
        schema_version: Dec(SCHEMA_VERSION),
        kind: ad.kind(),
        field_params: FieldParamsDoc { modulus: Dec(ad.params.modulus()), coord_bits: Dec(ad.params.coord_bits()) },
        poseidon: poseidon_doc(&ad.pp),
        sizes,
        policy,
        geometry,
        h_ex: Some(Dec(inst.h_ex.value())),
        trail: inst.trail.points.iter().copied().map(point_doc).collect(),
    }
}

impl From<FieldElement> for Dec<u128> {
    fn from(v: FieldElement) -> Self {
        Dec(v.value())
    }
}
