//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_integer::{Integer, Roots};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zkpol_core::appio::{generate_instance, random_instance, FixtureMode, FixtureSpec, RandomCaps};
use zkpol_core::circuit::{ConstraintSystem, Domain, Reader};
use zkpol_core::gadgets::poseidon::{poseidon_hash, poseidon_permute};
use zkpol_core::gadgets::region::check_inside_triangle;
use zkpol_core::gadgets::sqrt::{sqrt_floor, sqrt_floor_with, SqrtMode};
use zkpol_core::localcalc::{self, get_bcoords, point_in_triangle, segment_lengths};
use zkpol_core::protocol::{ideal_outputs, run_session, Outcome, Scenario, SessionInputs, Tamper, WitnessOverrides};
use zkpol_core::statements::{
    build, build_ev_subsidy_with_mode, build_highway_tax_with_mode, statement_cost, Honest, EV_SQRT_MODE, TAX_SQRT_MODE,
};
use zkpol_core::{
    AuthorityData, Circle, Field, FieldElement, FieldParams, Geometry, Point, Policy, PoseidonParams,
    StatementInstance, StatementKind, SubsidyPolicy, Trail, Triangle,
};

type Verdict = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Verdict);

fn field() -> Field {
    FieldParams::default().field()
}

fn pp() -> PoseidonParams {
    PoseidonParams::default_for(field())
}

// Independent plaintext oracles. Segment lengths use num-integer's root
// and containment uses area sums rather than orientation signs.

fn seg_len(a: Point, b: Point) -> u128 {
    let dx = (a.x - b.x) as i128;
    let dy = (a.y - b.y) as i128;
    ((dx * dx + dy * dy) as u128).sqrt()
}

fn in_circle(p: Point, c: &Circle) -> bool {
    let dx = (p.x - c.center.x) as i128;
    let dy = (p.y - c.center.y) as i128;
    dx * dx + dy * dy <= (c.radius as i128) * (c.radius as i128)
}

fn tri_area2(a: Point, b: Point, c: Point) -> i128 {
    ((b.x - a.x) as i128 * (c.y - a.y) as i128 - (c.x - a.x) as i128 * (b.y - a.y) as i128).abs()
}

fn in_triangle_by_areas(p: Point, t: &Triangle) -> bool {
    let [a, b, c] = t.0;
    tri_area2(a, b, c) == tri_area2(p, b, c) + tri_area2(a, p, c) + tri_area2(a, b, p)
}

fn totals(trail: &[Point], inside: impl Fn(Point) -> bool) -> (u128, u128) {
    let mut tot = 0;
    let mut both = 0;
    for w in trail.windows(2) {
        let d = seg_len(w[0], w[1]);
        tot += d;
        if inside(w[0]) && inside(w[1]) {
            both += d;
        }
    }
    (tot, both)
}

fn independent_oracle(inst: &StatementInstance) -> bool {
    let pts = &inst.trail.points;
    match (&inst.ad.policy, &inst.ad.geometry) {
        (Policy::Subsidy(p), Geometry::Circles(cs)) => {
            let (tot, cc) = totals(pts, |q| cs.iter().any(|c| in_circle(q, c)));
            tot >= p.d_req as u128 && 100 * cc >= (p.p_req as u128) * tot
        }
        (Policy::Tax(p), Geometry::Triangles { triangles, .. }) => {
            let (tot, hw) = totals(pts, |q| triangles.iter().any(|t| in_triangle_by_areas(q, t)));
            tot - hw <= p.d_max as u128
        }
        _ => panic!("mixed statement kinds"),
    }
}

fn satisfied(inst: &StatementInstance) -> bool {
    build(inst, &Honest).unwrap().check().unwrap().satisfied
}

fn oracle_equivalence(kind: StatementKind, max_geo: usize, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let caps = RandomCaps { max_traj: 64, max_geo, coord_bits: 12 };
    let mut n_true = 0;
    for i in 0..1000 {
        let inst = random_instance(kind, &mut rng, caps);
        let want = independent_oracle(&inst);
        if inst.oracle() != want {
            return Err(format!("instance {i}: library oracle {} vs independent {want}", inst.oracle()));
        }
        let got = satisfied(&inst);
        if got != want {
            return Err(format!("instance {i}: circuit {got}, oracle {want}"));
        }
        n_true += want as usize;
    }
    Ok(format!("1000 instances, 0 disagreements ({n_true} true, {} false)", 1000 - n_true))
}

fn sqrt_circuit(v: u128, k: u32, d: Option<u128>) -> (Option<u128>, bool) {
    let mut cs = ConstraintSystem::new(field());
    let f = cs.field();
    let w = cs.wire_input(f.elem(v), Domain::ProverOnly).unwrap();
    let r = match d {
        None => sqrt_floor(&mut cs, w, k, SqrtMode::Both).unwrap(),
        Some(d) => sqrt_floor_with(&mut cs, w, k, SqrtMode::Both, Some(f.elem(d))).unwrap(),
    };
    let ok = cs.evaluate_and_check().unwrap().satisfied;
    (cs.read(r, Reader::Prover).map(|x| x.value()), ok)
}

fn criterion_3() -> Verdict {
    for v in 0..(1u128 << 20) {
        let (d, ok) = sqrt_circuit(v, 10, None);
        let d = d.ok_or("root unreadable")?;
        if !ok || d * d > v || (d + 1) * (d + 1) <= v {
            return Err(format!("honest witness fails at v = {v}"));
        }
    }
    // Every in-range root for 20-bit values, a window plus field-wrapping
    // candidates for 48-bit values.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = field().modulus();
    let mut tried = 0usize;
    for i in 0..10_000 {
        let (v, k) =
            if i % 10 == 0 { (rng.gen_range(0..1u128 << 20), 10) } else { (rng.gen_range(0..1u128 << 48), 24) };
        let root = v.sqrt();
        let mut cands: Vec<u128> = if k == 10 {
            (0..1u128 << 10).collect()
        } else {
            let mut c: Vec<u128> = (1..=8).flat_map(|j| [root + j, root.saturating_sub(j)]).collect();
            c.extend((0..8).map(|_| rng.gen_range(0..1u128 << 24)));
            c.extend([1 << 24, (1 << 24) + root, p - root, p - root - 1, p - 1]);
            c
        };
        cands.retain(|&d| d != root);
        for d in cands {
            tried += 1;
            if sqrt_circuit(v, k, Some(d)).1 {
                return Err(format!("wrong root {d} accepted for v = {v}"));
            }
        }
    }
    Ok(format!("2^20 honest roots, {tried} wrong roots over 10000 values rejected"))
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k_c = FieldParams::default().coord_bits();
    let (mut boundary, mut inside) = (0, 0);
    for i in 0..10_000 {
        let bits = if i % 4 == 0 { k_c } else { 12 };
        let bound = 1i64 << bits;
        let tri = loop {
            let mut v = || Point::new(rng.gen_range(0..bound), rng.gen_range(0..bound));
            let t = Triangle::new(v(), v(), v());
            match t.area_dbl_sgn() {
                0 => continue,
                a if a < 0 => break t.flipped(),
                _ => break t,
            }
        };
        let p = match i % 5 {
            0 => {
                // A lattice point on an edge (or a vertex).
                let e = rng.gen_range(0..3);
                let (a, b) = (tri.0[e], tri.0[(e + 1) % 3]);
                let g = (b.x - a.x).gcd(&(b.y - a.y)).max(1);
                let j = rng.gen_range(0..=g);
                Point::new(a.x + (b.x - a.x) / g * j, a.y + (b.y - a.y) / g * j)
            }
            1 => {
                let xs = tri.0.map(|q| q.x);
                let ys = tri.0.map(|q| q.y);
                let x = rng.gen_range(*xs.iter().min().unwrap()..=*xs.iter().max().unwrap());
                let y = rng.gen_range(*ys.iter().min().unwrap()..=*ys.iter().max().unwrap());
                Point::new(x, y)
            }
            _ => Point::new(rng.gen_range(0..bound), rng.gen_range(0..bound)),
        };
        let bc = get_bcoords(p.x, p.y, &tri).map_err(|e| e.to_string())?;
        let area = tri.area_dbl_sgn();
        let u = bc.u(area);
        let [a, b, c] = tri.0;
        let rx = u * a.x as i128 + bc.s * b.x as i128 + bc.t * c.x as i128;
        let ry = u * a.y as i128 + bc.s * b.y as i128 + bc.t * c.y as i128;
        if rx != p.x as i128 * area || ry != p.y as i128 * area {
            return Err(format!("case {i}: reconstruction fails for {p:?} in {tri:?}"));
        }
        let want = point_in_triangle(p, &tri);
        if want != in_triangle_by_areas(p, &tri) || want != (bc.s >= 0 && bc.t >= 0 && u >= 0) {
            return Err(format!("case {i}: containment oracles disagree for {p:?} in {tri:?}"));
        }
        let on_edge = want && (bc.s == 0 || bc.t == 0 || u == 0);
        boundary += on_edge as usize;
        inside += want as usize;

        let mut cs = ConstraintSystem::new(field());
        let f = cs.field();
        let shared = |cs: &mut ConstraintSystem, v: i64| {
            cs.wire_input(f.from_signed(v as i128).unwrap(), Domain::Shared).unwrap()
        };
        let xa = [shared(&mut cs, a.x), shared(&mut cs, b.x), shared(&mut cs, c.x)];
        let ya = [shared(&mut cs, a.y), shared(&mut cs, b.y), shared(&mut cs, c.y)];
        let x = cs.wire_input(f.from_signed(p.x as i128).unwrap(), Domain::ProverOnly).unwrap();
        let y = cs.wire_input(f.from_signed(p.y as i128).unwrap(), Domain::ProverOnly).unwrap();
        let out = check_inside_triangle(&mut cs, xa, ya, x, y, Some(bc), k_c).unwrap();
        let report = cs.evaluate_and_check().unwrap();
        let got = cs.read(out, Reader::Prover).unwrap() == FieldElement::ONE;
        if !report.satisfied || got != want {
            return Err(format!("case {i}: gadget verdict {got} (satisfied {}) for {p:?}", report.satisfied));
        }
    }
    if boundary < 100 {
        return Err(format!("only {boundary} boundary cases"));
    }
    Ok(format!("10000 cases ({inside} inside, {boundary} on the boundary), 0 failures"))
}

/// A point differing from `p` in exactly one coordinate, still in range.
fn flip_one(p: Point, bits: u32, rng: &mut impl Rng) -> Point {
    let bound = 1i64 << bits;
    let mut q = p;
    let c = if rng.gen_bool(0.5) { &mut q.x } else { &mut q.y };
    *c = match rng.gen_range(0..3) {
        0 => *c ^ (1 << rng.gen_range(0..bits)),
        1 if *c + 1 < bound => *c + 1,
        _ if *c > 0 => *c - 1,
        _ => *c + 1,
    };
    q
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let caps =
        |kind| RandomCaps { max_traj: 64, max_geo: if kind == StatementKind::Ev { 8 } else { 16 }, coord_bits: 12 };
    let mut done = 0;
    while done < 500 {
        let kind = if done % 2 == 0 { StatementKind::Ev } else { StatementKind::Tax };
        let inst = random_instance(kind, &mut rng, caps(kind));
        if !inst.oracle() {
            continue;
        }
        let i = rng.gen_range(0..inst.trail.points.len());
        let forged = loop {
            let mut pts = inst.trail.points.clone();
            pts[i] = flip_one(pts[i], 12, &mut rng);
            let t = inst.with_trail(Trail::new(pts));
            if t.validate().is_ok() {
                break t;
            }
        };
        if satisfied(&forged) {
            return Err(format!("flipped point {i} of a {kind:?} instance still satisfies"));
        }
        done += 1;
    }
    Ok("500/500 single-coordinate flips unsatisfiable".into())
}

fn criterion_6() -> Verdict {
    let pp = pp();
    let f = field();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rand_elem = |rng: &mut ChaCha8Rng| f.elem(rng.gen_range(0..f.modulus()));
    for i in 0..1000 {
        let state: Vec<FieldElement> = (0..pp.t()).map(|_| rand_elem(&mut rng)).collect();
        let mut want = state.clone();
        localcalc::poseidon_permute(&pp, &mut want).map_err(|e| e.to_string())?;
        let mut cs = ConstraintSystem::new(f);
        let ws: Vec<_> = state.iter().map(|&v| cs.wire_input(v, Domain::ProverOnly).unwrap()).collect();
        let out = poseidon_permute(&mut cs, &ws, &pp).unwrap();
        cs.evaluate_and_check().unwrap();
        let got: Vec<_> = out.iter().map(|&w| cs.read(w, Reader::Prover).unwrap()).collect();
        if got != want {
            return Err(format!("state {i}: gadget and plaintext permutation differ"));
        }
    }
    for i in 0..1000 {
        let len = rng.gen_range(1..=16);
        let msg: Vec<FieldElement> = (0..len).map(|_| rand_elem(&mut rng)).collect();
        let h1 = localcalc::poseidon_hash(&pp, &msg).unwrap();
        if h1 != localcalc::poseidon_hash(&pp, &msg).unwrap() {
            return Err(format!("trial {i}: digest not deterministic"));
        }
        let mut other = msg.clone();
        let j = rng.gen_range(0..len);
        while other[j] == msg[j] {
            other[j] = rand_elem(&mut rng);
        }
        if localcalc::poseidon_hash(&pp, &other).unwrap() == h1 {
            return Err(format!("trial {i}: perturbing element {j} kept the digest"));
        }
        if i % 10 == 0 {
            let mut cs = ConstraintSystem::new(f);
            let ws: Vec<_> = msg.iter().map(|&v| cs.wire_input(v, Domain::ProverOnly).unwrap()).collect();
            let h = poseidon_hash(&mut cs, &ws, &pp).unwrap();
            cs.evaluate_and_check().unwrap();
            if cs.read(h, Reader::Prover) != Some(h1) {
                return Err(format!("trial {i}: gadget digest differs"));
            }
        }
    }
    Ok("1000 permutations match, 1000 perturbations change the digest".into())
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut attempts = 0;
    let mut relaxed_ev_accepts = 0;
    for kind in [StatementKind::Ev, StatementKind::Tax] {
        let caps = RandomCaps { max_traj: 32, max_geo: if kind == StatementKind::Ev { 8 } else { 16 }, coord_bits: 12 };
        let mut done = 0;
        while done < 500 {
            let inst = random_instance(kind, &mut rng, caps);
            if inst.oracle() || inst.trail.points.len() < 2 {
                continue;
            }
            let honest = segment_lengths(&inst.trail.points);
            for attack in 0..3 {
                let mut o = WitnessOverrides::default();
                for (seg, &d) in honest.iter().enumerate() {
                    let forged = match (kind, attack) {
                        // Understated roots: the witnesses a lower-bound-only check admits.
                        (StatementKind::Ev, 0) => 0,
                        (StatementKind::Ev, _) if rng.gen_bool(0.5) => d - rng.gen_range(0..=d),
                        // Overstated roots: the witnesses an upper-bound-only check admits.
                        (StatementKind::Tax, 0) => d + 1,
                        (StatementKind::Tax, _) if rng.gen_bool(0.5) => d + rng.gen_range(1..=64),
                        _ => d,
                    };
                    if forged != d {
                        o.segment_lengths.push((seg, forged));
                    }
                }
                attempts += 1;
                let (mode, built) = match kind {
                    StatementKind::Ev => (EV_SQRT_MODE, build_ev_subsidy_with_mode(&inst, &o, EV_SQRT_MODE)),
                    StatementKind::Tax => (TAX_SQRT_MODE, build_highway_tax_with_mode(&inst, &o, TAX_SQRT_MODE)),
                };
                if built.unwrap().check().unwrap().satisfied {
                    return Err(format!("{kind:?} instance forged with {mode:?} roots (attack {attack})"));
                }
                if kind == StatementKind::Ev {
                    let mut relaxed = build_ev_subsidy_with_mode(&inst, &o, SqrtMode::LowerOnly).unwrap();
                    relaxed_ev_accepts += relaxed.check().unwrap().satisfied as usize;
                }
            }
            done += 1;
        }
    }
    Ok(format!(
        "500+500 non-compliant instances, {attempts} one-sided witnesses, 0 accepted \
         (ev={EV_SQRT_MODE:?}, tax={TAX_SQRT_MODE:?}; a lower-only ev check would accept {relaxed_ev_accepts})"
    ))
}

fn ev_instance(n_traj: usize, n_circ: usize, rng: &mut impl Rng) -> StatementInstance {
    let bound = 1i64 << 12;
    let circles = (0..n_circ)
        .map(|_| Circle::new(rng.gen_range(0..bound), rng.gen_range(0..bound), rng.gen_range(1..bound / 4)))
        .collect();
    let len = rng.gen_range(1..=n_traj);
    let trail = (0..len).map(|_| Point::new(rng.gen_range(0..bound), rng.gen_range(0..bound))).collect();
    let policy = Policy::Subsidy(SubsidyPolicy { d_req: rng.gen_range(0..20_000), p_req: rng.gen_range(0..=100) });
    let ad = AuthorityData {
        params: FieldParams::default(),
        pp: pp(),
        n_traj,
        policy,
        geometry: Geometry::Circles(circles),
    };
    StatementInstance::new(ad, Trail::new(trail)).unwrap()
}

fn criterion_8() -> Verdict {
    let params = FieldParams::default();
    let pp = pp();
    let n_mul = |nt, nc| statement_cost(StatementKind::Ev, nt, nc, params, &pp).unwrap().n_mul as f64;
    let within = |name: &str, predicted: f64, actual: f64| -> Result<String, String> {
        let err = (actual - predicted).abs() / actual;
        if err <= 0.10 {
            Ok(format!("{name} {:.2}%", 100.0 * err))
        } else {
            Err(format!("{name}: predicted {predicted}, actual {actual}"))
        }
    };
    let (a, b, c) = (n_mul(32, 4), n_mul(64, 4), n_mul(64, 8));
    // Straight-line extrapolation from the three size points, along each axis.
    let along_traj = within("n_traj", b + 2.0 * (b - a), n_mul(128, 4))?;
    let along_circ = within("n_circ", c + (c - b), n_mul(64, 12))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (nt, nc) in [(32, 4), (64, 4), (64, 8)] {
        let want = statement_cost(StatementKind::Ev, nt, nc, params, &pp).unwrap();
        for w in 0..20 {
            let inst = ev_instance(nt, nc, &mut rng);
            let mut o = WitnessOverrides::default();
            if w % 2 == 1 {
                o.segment_lengths.push((0, rng.gen_range(0..1000)));
            }
            let got = build(&inst, &o).unwrap().cs.counters();
            if got != want {
                return Err(format!("witness {w} at ({nt}, {nc}): counters {got:?} vs {want:?}"));
            }
        }
    }
    Ok(format!("n_mul (32,4)={a} (64,4)={b} (64,8)={c}; extrapolation error {along_traj}, {along_circ}; 60 witnesses with identical counters"))
}

fn protocol_fixture(mode: FixtureMode, i: u64) -> StatementInstance {
    let kind = if i.is_multiple_of(2) { StatementKind::Ev } else { StatementKind::Tax };
    let mut seed = 9_000 + i * 7;
    loop {
        let mut spec = FixtureSpec::new(kind, mode, seed, 16, 4);
        spec.coord_bound_bits = 10;
        if let Ok(inst) = generate_instance(&spec) {
            return inst;
        }
        seed += 1;
    }
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut audit = 0;
    let mut session =
        |scen: Scenario, inputs: SessionInputs, want: (Outcome, Outcome), label: &str, i: u64| -> Result<(), String> {
            let t = run_session(&scen, &inputs).map_err(|e| e.to_string())?;
            audit += t.audit_violations;
            let ideal = ideal_outputs(&scen, &inputs).map_err(|e| e.to_string())?;
            let got = (t.prover_output(), t.verifier_output());
            if got != (ideal.prover, ideal.verifier) {
                return Err(format!("{label} {i}: real {got:?} vs ideal ({:?}, {:?})", ideal.prover, ideal.verifier));
            }
            let ok = match label {
                "substitution" | "ad-mismatch" => got.1 == want.1,
                _ => got == want,
            };
            if !ok {
                return Err(format!("{label} {i}: outputs {got:?}, wanted {want:?}"));
            }
            Ok(())
        };
    use Outcome::{NotOk, Ok as Yes};
    for i in 0..100 {
        let good = protocol_fixture(FixtureMode::Compliant, i);
        let bad = protocol_fixture(FixtureMode::NonCompliant, i);
        session(
            Scenario::honest(),
            SessionInputs::from_instance(&good, format!("c{i}"), i),
            (Yes, Yes),
            "honest-compliant",
            i,
        )?;
        session(
            Scenario::honest(),
            SessionInputs::from_instance(&bad, format!("n{i}"), i),
            (NotOk, NotOk),
            "honest-non-compliant",
            i,
        )?;

        let idx = rng.gen_range(0..good.trail.points.len());
        let point = flip_one(good.trail.points[idx], 10, &mut rng);
        let scen = Scenario::corrupt_prover(Tamper::ReplacePoint { index: idx, point });
        session(scen, SessionInputs::from_instance(&good, format!("s{i}"), i), (Yes, NotOk), "substitution", i)?;

        let mut ad_v = good.ad.clone();
        match (&mut ad_v.policy, &mut ad_v.geometry, i % 3) {
            (Policy::Subsidy(p), _, 0) => p.d_req += 1,
            (Policy::Tax(p), _, 0) => p.d_max += 1,
            (_, Geometry::Circles(c), _) => c[0].radius += 1,
            (_, Geometry::Triangles { triangles, .. }, _) => triangles[0].0[0].x ^= 1,
        }
        let inputs = SessionInputs::from_instance(&good, format!("m{i}"), i).with_verifier_ad(ad_v);
        session(Scenario::honest(), inputs, (Yes, NotOk), "ad-mismatch", i)?;
    }
    if audit != 0 {
        return Err(format!("{audit} prover-only reads from verifier context"));
    }
    Ok("400 sessions as expected and equal to ideal outputs, 0 audit violations".into())
}

fn criterion_10() -> Verdict {
    let dir = std::env::temp_dir().join(format!("zkpol-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let zkpol = |args: &[&str]| -> Result<i32, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_zkpol")).args(args).output().map_err(|e| e.to_string())?;
        o.status.code().ok_or_else(|| "killed by signal".to_string())
    };
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let mut summary = Vec::new();
    // A local drive of roughly 90 km, and one of roughly 50 km that falls
    // short of the distance requirement.
    for (mode, step, want) in [("compliant", 450, 0), ("non_compliant", 250, 1)] {
        let spec = format!(
            r#"{{"kind":"ev","mode":"{mode}","seed":80,"n_traj":256,"n_geo":8,"coord_bound_bits":17,
                "step":{step},"jump_permille":0,"d_req":80000,"p_req":80}}"#
        );
        std::fs::write(path("spec.json"), spec).map_err(|e| e.to_string())?;
        let out = path(&format!("{mode}.json"));
        if zkpol(&["gen", &path("spec.json"), "-o", &out])? != 0 {
            return Err(format!("gen failed for {mode}"));
        }
        let inst = zkpol_core::appio::load_instance(Path::new(&out)).map_err(|e| e.to_string())?;
        let Policy::Subsidy(p) = inst.ad.policy else { return Err("wrong policy kind".into()) };
        if (p.d_req, p.p_req, inst.ad.n_traj) != (80_000, 80, 256) {
            return Err(format!("{mode}: fixture has d_req={} p_req={} n_traj={}", p.d_req, p.p_req, inst.ad.n_traj));
        }
        let oracle = independent_oracle(&inst);
        if oracle != (want == 0) || satisfied(&inst) != oracle {
            return Err(format!("{mode}: oracle {oracle}, circuit {}", satisfied(&inst)));
        }
        for cmd in ["check", "oracle"] {
            let code = zkpol(&[cmd, &out])?;
            if code != want {
                return Err(format!("{cmd} {mode} exited {code}, wanted {want}"));
            }
        }
        let (tot, _) = totals(&inst.trail.points, |_| false);
        summary.push(format!("{mode} tot={tot}"));
    }
    std::fs::write(path("broken.json"), "{").map_err(|e| e.to_string())?;
    let code = zkpol(&["check", &path("broken.json")])?;
    if code != 2 {
        return Err(format!("malformed input exited {code}, wanted 2"));
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("d_req=80000 P_req=80 n_traj=256 ({}), exit codes 0/1/2 as specified", summary.join(", ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "oracle equivalence, ev", || oracle_equivalence(StatementKind::Ev, 8, 1)),
        (2, "oracle equivalence, tax", || oracle_equivalence(StatementKind::Tax, 16, 2)),
        (3, "sqrt totality", criterion_3),
        (4, "barycentric exactness", criterion_4),
        (5, "hash binding", criterion_5),
        (6, "poseidon consistency", criterion_6),
        (7, "one-sided sqrt safety", criterion_7),
        (8, "cost linearity", criterion_8),
        (9, "protocol battery", criterion_9),
        (10, "parameter smoke test", criterion_10),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, name, run) in criteria {
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
