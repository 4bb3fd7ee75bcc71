use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gadgets::PoseidonParams;
use crate::geometry::{Circle, Point, Rect, Triangle};
use crate::localcalc::{self, ev_totals, tax_totals};
use crate::statements::{
    AuthorityData, Geometry, Policy, StatementInstance, StatementKind, SubsidyPolicy, TaxPolicy, Trail,
};

use super::schema::{instance_to_doc, FieldParamsDoc, InstanceDoc};
use super::AppioError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureMode {
    /// Oracle verdict true.
    Compliant,
    /// Oracle verdict false.
    NonCompliant,
    /// True, with the distance threshold met exactly.
    Boundary,
}

/// Recipe for a generated instance. The same spec always yields the same
/// instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub kind: StatementKind,
    pub mode: FixtureMode,
    pub seed: u64,
    pub n_traj: usize,
    /// Number of circles or triangles.
    pub n_geo: usize,
    /// Real trail length; defaults to `n_traj`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trail_len: Option<usize>,
    /// Generated coordinates lie in `[0, 2^coord_bound_bits)`.
    #[serde(default = "default_bound_bits")]
    pub coord_bound_bits: u32,
    /// Largest per-axis step of the random walk; defaults to 1/32 of the bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<i64>,
    /// Chance per point, in thousandths, that the walk jumps instead of
    /// stepping (to another circle or anywhere for the subsidy statement,
    /// onto the road for the tax statement). Defaults depend on `mode`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_permille: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_req: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_req: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<u64>,
    #[serde(default)]
    pub field_params: FieldParamsDoc,
}

fn default_bound_bits() -> u32 {
    12
}

impl FixtureSpec {
    pub fn new(kind: StatementKind, mode: FixtureMode, seed: u64, n_traj: usize, n_geo: usize) -> Self {
        Self {
            kind,
            mode,
            seed,
            n_traj,
            n_geo,
            trail_len: None,
            coord_bound_bits: default_bound_bits(),
            step: None,
            jump_permille: None,
            d_req: None,
            p_req: None,
            d_max: None,
            field_params: FieldParamsDoc::default(),
        }
    }
}

const MAX_TRAJ: usize = 4096;
const ATTEMPTS: usize = 64;

/// Generates the instance file for `spec`.
pub fn gen_fixture(spec: &FixtureSpec) -> Result<InstanceDoc, AppioError> {
    generate_instance(spec).map(|inst| instance_to_doc(&inst))
}

pub fn generate_instance(spec: &FixtureSpec) -> Result<StatementInstance, AppioError> {
    let params = spec.field_params.to_params()?;
    let fail = |m: String| Err(AppioError::GenerationFailed(m));
    if spec.n_traj == 0 || spec.n_traj > MAX_TRAJ {
        return fail(format!("n_traj must be in 1..={MAX_TRAJ}"));
    }
    let len = spec.trail_len.unwrap_or(spec.n_traj);
    if len == 0 || len > spec.n_traj {
        return fail(format!("trail_len must be in 1..={}", spec.n_traj));
    }
    if spec.n_geo == 0 {
        return fail("n_geo must be positive".into());
    }
    if spec.coord_bound_bits < 6 || spec.coord_bound_bits > params.coord_bits() {
        return fail(format!("coord_bound_bits must be in 6..={}", params.coord_bits()));
    }
    let bound = 1i64 << spec.coord_bound_bits;
    let step = spec.step.unwrap_or(bound / 32).clamp(1, bound);
    if spec.jump_permille.is_some_and(|j| j > 1000) {
        return fail("jump_permille must be at most 1000".into());
    }
    let jump = spec.jump_permille.map(|j| j as f64 / 1000.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pp = PoseidonParams::default_for(params.field());

    for _ in 0..ATTEMPTS {
        let (policy, geometry, trail) = match spec.kind {
            StatementKind::Ev => {
                let circles = random_circles(&mut rng, spec.n_geo, bound);
                let (hop, p_out) = match (jump, spec.mode) {
                    (Some(j), _) => (j / 2.0, j / 2.0),
                    (None, FixtureMode::NonCompliant) => (0.1, 0.3),
                    (None, _) => (0.1, 0.05),
                };
                let trail = ev_walk(&mut rng, &circles, len, step, bound, hop, p_out);
                let Some(policy) = ev_policy(&mut rng, spec, &trail, &circles) else {
                    continue;
                };
                (Policy::Subsidy(policy), Geometry::Circles(circles), trail)
            }
            StatementKind::Tax => {
                let bbox = Rect::new(0, 0, bound - 1, bound - 1);
                let (road, triangles) = random_road(&mut rng, spec.n_geo, bound)?;
                let p_road = match (jump, spec.mode) {
                    (Some(j), _) => j,
                    (None, FixtureMode::NonCompliant) => 0.4,
                    (None, _) => 0.15,
                };
                let trail = tax_walk(&mut rng, &road, len, step, bbox, p_road);
                let Some(policy) = tax_policy(&mut rng, spec, &trail, &triangles) else {
                    continue;
                };
                (Policy::Tax(policy), Geometry::Triangles { triangles, region: Some(bbox) }, trail)
            }
        };
        let ad = AuthorityData { params, pp: pp.clone(), n_traj: spec.n_traj, policy, geometry };
        let inst =
            StatementInstance::new(ad, Trail::new(trail)).map_err(|e| AppioError::GenerationFailed(e.to_string()))?;
        let want = spec.mode != FixtureMode::NonCompliant;
        if inst.oracle() == want {
            return Ok(inst);
        }
    }
    fail(format!("no {:?} instance found after {ATTEMPTS} attempts", spec.mode))
}

fn random_circles(rng: &mut impl Rng, n: usize, bound: i64) -> Vec<Circle> {
    (0..n)
        .map(|_| {
            let r = rng.gen_range(bound / 16..=bound / 6);
            Circle::new(rng.gen_range(r..bound - r), rng.gen_range(r..bound - r), r)
        })
        .collect()
}

fn point_in_circle(rng: &mut impl Rng, c: &Circle, bound: i64) -> Point {
    let r = c.radius;
    for _ in 0..64 {
        let p = Point::new(c.center.x + rng.gen_range(-r..=r), c.center.y + rng.gen_range(-r..=r));
        if c.contains(p) && (0..bound).contains(&p.x) && (0..bound).contains(&p.y) {
            return p;
        }
    }
    c.center
}

fn step_from(rng: &mut impl Rng, p: Point, step: i64, bound: i64) -> Point {
    Point::new(
        (p.x + rng.gen_range(-step..=step)).clamp(0, bound - 1),
        (p.y + rng.gen_range(-step..=step)).clamp(0, bound - 1),
    )
}

/// Walk that mostly stays inside the current circle, jumping to another
/// circle with probability `hop` and to an arbitrary point with `p_out`.
fn ev_walk(
    rng: &mut impl Rng,
    circles: &[Circle],
    len: usize,
    step: i64,
    bound: i64,
    hop: f64,
    p_out: f64,
) -> Vec<Point> {
    let mut cur = rng.gen_range(0..circles.len());
    let mut p = point_in_circle(rng, &circles[cur], bound);
    let mut out = vec![p];
    while out.len() < len {
        p = if rng.gen_bool(p_out) {
            Point::new(rng.gen_range(0..bound), rng.gen_range(0..bound))
        } else if rng.gen_bool(hop) {
            cur = rng.gen_range(0..circles.len());
            point_in_circle(rng, &circles[cur], bound)
        } else {
            (0..20)
                .map(|_| step_from(rng, p, step, bound))
                .find(|q| circles[cur].contains(*q))
                .unwrap_or_else(|| point_in_circle(rng, &circles[cur], bound))
        };
        out.push(p);
    }
    out
}

fn pct_max(tot: u128, cc: u128) -> u64 {
    (cc * 100).checked_div(tot).map_or(100, |p| p as u64)
}

fn ev_policy(rng: &mut impl Rng, spec: &FixtureSpec, trail: &[Point], circles: &[Circle]) -> Option<SubsidyPolicy> {
    let (tot, cc) = ev_totals(trail, circles);
    let tot64 = u64::try_from(tot).ok()?;
    let best = pct_max(tot, cc);
    let (d_req, p_req) = match spec.mode {
        FixtureMode::Compliant => (
            spec.d_req.unwrap_or_else(|| rng.gen_range(0..=tot64)),
            spec.p_req.unwrap_or_else(|| rng.gen_range(0..=best)),
        ),
        FixtureMode::Boundary => (spec.d_req.unwrap_or(tot64), spec.p_req.unwrap_or(best)),
        FixtureMode::NonCompliant => {
            if spec.d_req.is_some() || spec.p_req.is_some() {
                (spec.d_req.unwrap_or(0), spec.p_req.unwrap_or(0))
            } else if best < 100 && rng.gen_bool(0.5) {
                (rng.gen_range(0..=tot64), rng.gen_range(best + 1..=100))
            } else {
                (tot64 + rng.gen_range(1..=tot64 / 4 + 1), rng.gen_range(0..=best))
            }
        }
    };
    if spec.mode == FixtureMode::Boundary && d_req != tot64 {
        return None;
    }
    Some(SubsidyPolicy { d_req, p_req })
}

/// Straight road for fewer than 12 triangles, an L-shaped one otherwise;
/// the triangulation is padded to `n` by repeating its last triangle.
fn random_road(rng: &mut impl Rng, n: usize, bound: i64) -> Result<(Vec<Rect>, Vec<Triangle>), AppioError> {
    let bbox = Rect::new(0, 0, bound - 1, bound - 1);
    let margin = (bound / 64).max(1);
    let y = rng.gen_range(bound / 4..3 * bound / 4);
    let polyline = if n >= 12 {
        let x = rng.gen_range(bound / 4..3 * bound / 4);
        vec![Point::new(0, y), Point::new(x, y), Point::new(x, bound - 1)]
    } else {
        vec![Point::new(0, y), Point::new(bound - 1, y)]
    };
    let mut triangles = corridor_triangulate(&polyline, margin, bbox)?;
    if triangles.len() > n || triangles.is_empty() {
        return Err(AppioError::GenerationFailed(format!(
            "road triangulation has {} triangles, cannot fit n_tri = {n}",
            triangles.len()
        )));
    }
    let last = *triangles.last().expect("non-empty");
    triangles.resize(n, last);
    Ok((corridor_rects(&polyline, margin, bbox), triangles))
}

fn tax_walk(rng: &mut impl Rng, road: &[Rect], len: usize, step: i64, bbox: Rect, p_road: f64) -> Vec<Point> {
    let bound = bbox.x1 + 1;
    let on_road = |rng: &mut dyn rand::RngCore| {
        let r = road[rng.gen_range(0..road.len())];
        Point::new(rng.gen_range(r.x0..=r.x1), rng.gen_range(r.y0..=r.y1))
    };
    let mut p = Point::new(rng.gen_range(0..bound), rng.gen_range(0..bound));
    let mut out = vec![p];
    while out.len() < len {
        p = if rng.gen_bool(p_road) { on_road(rng) } else { step_from(rng, p, step, bound) };
        out.push(p);
    }
    out
}

fn tax_policy(rng: &mut impl Rng, spec: &FixtureSpec, trail: &[Point], triangles: &[Triangle]) -> Option<TaxPolicy> {
    let (tot, hw) = tax_totals(trail, triangles);
    let taxed = u64::try_from(tot - hw).ok()?;
    let d_max = match spec.mode {
        FixtureMode::Compliant => spec.d_max.unwrap_or_else(|| taxed + rng.gen_range(0..=taxed / 2 + 1)),
        FixtureMode::Boundary => spec.d_max.unwrap_or(taxed),
        FixtureMode::NonCompliant => match spec.d_max {
            Some(d) => d,
            None if taxed == 0 => return None,
            None => rng.gen_range(0..taxed),
        },
    };
    if spec.mode == FixtureMode::Boundary && d_max != taxed {
        return None;
    }
    Some(TaxPolicy { d_max })
}

fn corridor_rects(polyline: &[Point], margin: i64, bbox: Rect) -> Vec<Rect> {
    let segs: Vec<(Point, Point)> = match polyline {
        [p] => vec![(*p, *p)],
        _ => polyline.windows(2).map(|w| (w[0], w[1])).collect(),
    };
    segs.into_iter()
        .map(|(a, b)| {
            Rect::new(a.x.min(b.x) - margin, a.y.min(b.y) - margin, a.x.max(b.x) + margin, a.y.max(b.y) + margin)
                .intersect(&bbox)
        })
        .collect()
}

/// Triangulates `bbox` minus a road corridor: every axis-aligned segment of
/// `polyline` inflated by `margin` on all sides.
///
/// The corridor rectangles' edges cut the box into a grid; every grid cell
/// outside the corridor becomes two counterclockwise triangles.
pub fn corridor_triangulate(polyline: &[Point], margin: i64, bbox: Rect) -> Result<Vec<Triangle>, AppioError> {
    if margin <= 0 {
        return Err(AppioError::Unsupported(format!("margin must be positive, got {margin}")));
    }
    if let Some(w) = polyline.windows(2).find(|w| w[0].x != w[1].x && w[0].y != w[1].y) {
        return Err(AppioError::Unsupported(format!("segment {:?} -> {:?} is not axis-aligned", w[0], w[1])));
    }
    if bbox.is_empty() {
        return Ok(Vec::new());
    }
    let rects: Vec<Rect> =
        corridor_rects(polyline, margin, bbox).into_iter().filter(|r| r.x0 <= r.x1 && r.y0 <= r.y1).collect();
    let mut xs = vec![bbox.x0, bbox.x1];
    let mut ys = vec![bbox.y0, bbox.y1];
    for r in &rects {
        xs.extend([r.x0, r.x1]);
        ys.extend([r.y0, r.y1]);
    }
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut out = Vec::new();
    for yw in ys.windows(2) {
        for xw in xs.windows(2) {
            let cell = Rect::new(xw[0], yw[0], xw[1], yw[1]);
            let covered =
                rects.iter().any(|r| r.x0 <= cell.x0 && cell.x1 <= r.x1 && r.y0 <= cell.y0 && cell.y1 <= r.y1);
            if covered {
                continue;
            }
            out.push(Triangle::new((cell.x0, cell.y0), (cell.x1, cell.y0), (cell.x1, cell.y1)));
            out.push(Triangle::new((cell.x0, cell.y0), (cell.x1, cell.y1), (cell.x0, cell.y1)));
        }
    }
    Ok(out)
}

/// Size caps for [`random_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomCaps {
    pub max_traj: usize,
    pub max_geo: usize,
    pub coord_bits: u32,
}

/// Random instance with a policy near the trail's actual values, so both
/// verdicts occur often. Boundary points (triangle vertices, circle rims)
/// are mixed in.
pub fn random_instance(kind: StatementKind, rng: &mut impl Rng, caps: RandomCaps) -> StatementInstance {
    let bound = 1i64 << caps.coord_bits;
    let n_traj = rng.gen_range(1..=caps.max_traj);
    let len = rng.gen_range(1..=n_traj);
    let n_geo = rng.gen_range(1..=caps.max_geo);
    let step = rng.gen_range(1..=bound / 8);
    let params = crate::field::FieldParams::default();
    let pp = PoseidonParams::default_for(params.field());
    let (policy, geometry, trail) = match kind {
        StatementKind::Ev => {
            let circles: Vec<Circle> = (0..n_geo)
                .map(|_| Circle::new(rng.gen_range(0..bound), rng.gen_range(0..bound), rng.gen_range(1..=bound / 4)))
                .collect();
            let mut trail = ev_walk(rng, &circles, len, step, bound, 0.1, 0.3);
            for p in trail.iter_mut() {
                if rng.gen_bool(0.05) {
                    // A point exactly on a rim, when it is inside the bound.
                    let c = circles[rng.gen_range(0..circles.len())];
                    let q = Point::new(c.center.x + c.radius, c.center.y);
                    if q.x < bound {
                        *p = q;
                    }
                }
            }
            let (tot, cc) = ev_totals(&trail, &circles);
            let tot = tot as u64;
            let d_req = match rng.gen_range(0..4) {
                0 => tot,
                1 => tot + 1,
                _ => rng.gen_range(0..=tot + tot / 4 + 1),
            };
            let best = pct_max(tot as u128, cc);
            let p_req = match rng.gen_range(0..4) {
                0 => best,
                1 => (best + 1).min(100),
                _ => rng.gen_range(0..=100),
            };
            (Policy::Subsidy(SubsidyPolicy { d_req, p_req }), Geometry::Circles(circles), trail)
        }
        StatementKind::Tax => {
            let mut triangles = Vec::with_capacity(n_geo);
            while triangles.len() < n_geo {
                let span = rng.gen_range(2..=bound / 2);
                let ax = rng.gen_range(0..bound - span);
                let ay = rng.gen_range(0..bound - span);
                let mut v = || Point::new(ax + rng.gen_range(0..=span), ay + rng.gen_range(0..=span));
                let t = Triangle::new(v(), v(), v());
                match t.area_dbl_sgn() {
                    0 => continue,
                    a if a < 0 => triangles.push(t.flipped()),
                    _ => triangles.push(t),
                }
            }
            let mut trail = Vec::with_capacity(len);
            let mut p = Point::new(rng.gen_range(0..bound), rng.gen_range(0..bound));
            while trail.len() < len {
                let tri = triangles[rng.gen_range(0..triangles.len())];
                p = match rng.gen_range(0..10) {
                    0 => tri.0[rng.gen_range(0..3)],
                    1 => {
                        // Edge midpoint when integral, else the vertex.
                        let (a, b) = (tri.0[0], tri.0[1]);
                        if (a.x + b.x) % 2 == 0 && (a.y + b.y) % 2 == 0 {
                            Point::new((a.x + b.x) / 2, (a.y + b.y) / 2)
                        } else {
                            a
                        }
                    }
                    2..=5 => point_in_triangle_rng(rng, &tri),
                    _ => step_from(rng, p, step, bound),
                };
                trail.push(p);
            }
            let (tot, hw) = tax_totals(&trail, &triangles);
            let taxed = (tot - hw) as u64;
            let d_max = match rng.gen_range(0..4) {
                0 => taxed,
                1 => taxed.saturating_sub(1),
                _ => rng.gen_range(0..=taxed + taxed / 4 + 1),
            };
            let region = Some(Rect::new(0, 0, bound - 1, bound - 1));
            (Policy::Tax(TaxPolicy { d_max }), Geometry::Triangles { triangles, region }, trail)
        }
    };
    let ad = AuthorityData { params, pp, n_traj, policy, geometry };
    StatementInstance::new(ad, Trail::new(trail)).expect("random instances are well-formed")
}

fn point_in_triangle_rng(rng: &mut impl Rng, tri: &Triangle) -> Point {
    let xs = tri.0.map(|p| p.x);
    let ys = tri.0.map(|p| p.y);
    let (x0, x1) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    let (y0, y1) = (*ys.iter().min().unwrap(), *ys.iter().max().unwrap());
    for _ in 0..64 {
        let p = Point::new(rng.gen_range(x0..=x1), rng.gen_range(y0..=y1));
        if localcalc::point_in_triangle(p, tri) {
            return p;
        }
    }
    tri.0[0]
}
