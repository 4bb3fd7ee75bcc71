//! The `zkpol` command line.
//!
//! Exit codes: 0 success, 1 statement unsatisfied (or plaintext verdict
//! false), 2 usage or input error, 3 internal invariant violation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use zkpol_core::appio::{gen_fixture, generate_instance, load_instance, FixtureMode, FixtureSpec};
use zkpol_core::localcalc::{ev_totals, find_triangle, get_bcoords, segment_lengths, tax_totals, BaryCoords};
use zkpol_core::protocol::{
    ideal_outputs, run_session, Corruption, MessageKind, Outcome, Scenario, SessionInputs, Tamper, WitnessOverrides,
};
use zkpol_core::statements::{build, statement_cost, Geometry, Honest, Policy, ProverStrategy};
use zkpol_core::{FieldElement, FieldParams, Point, PoseidonParams, StatementInstance, StatementKind, Trail};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSATISFIED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "zkpol", version, about = "Zero-knowledge proof-of-location statements")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the statement circuit for an instance and check it.
    Check { instance: PathBuf },
    /// Plaintext policy verdict for an instance.
    Oracle { instance: PathBuf },
    /// Mutate prover witnesses and check that no mutation is accepted wrongly.
    Fuzz {
        instance: PathBuf,
        #[arg(long, default_value_t = 100)]
        mutations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Circuit cost counters for given sizes.
    Cost {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// One or more trail lengths, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n_traj: Vec<usize>,
        /// Number of circles (ev), comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "n_tri")]
        n_circ: Vec<usize>,
        /// Number of triangles (tax), comma separated.
        #[arg(long, value_delimiter = ',')]
        n_tri: Vec<usize>,
        #[arg(long)]
        csv: bool,
    },
    /// Run a Witness/Prover/Verifier session and print its transcript.
    Session {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        /// Instance file; defaults to a generated compliant subsidy fixture.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "session-0")]
        sid: String,
        /// Tamper function of the corrupted party, e.g. `replace-point:0:10:12`,
        /// `flip-sig:5`, `force-output:ok`, `drop:sig`, `bump-hash`, `bump-policy`.
        #[arg(long)]
        tamper: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate an instance file from a fixture spec.
    Gen {
        spec: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Ev,
    Tax,
}

impl From<KindArg> for StatementKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ev => StatementKind::Ev,
            KindArg::Tax => StatementKind::Tax,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Honest,
    CorruptProver,
    CorruptVerifier,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    err: anyhow::Error,
}

fn usage(err: anyhow::Error) -> Failure {
    Failure { code: EXIT_USAGE, err }
}

fn invariant(err: anyhow::Error) -> Failure {
    Failure { code: EXIT_INVARIANT, err }
}

type CmdResult = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.cmd {
        Command::Check { instance } => cmd_check(&instance, out),
        Command::Oracle { instance } => cmd_oracle(&instance, out),
        Command::Fuzz { instance, mutations, seed } => cmd_fuzz(&instance, mutations, seed, out),
        Command::Cost { kind, n_traj, n_circ, n_tri, csv } => cmd_cost(kind.into(), &n_traj, &n_circ, &n_tri, csv, out),
        Command::Session { scenario, instance, seed, sid, tamper, output } => {
            cmd_session(scenario, instance.as_deref(), seed, sid, tamper.as_deref(), output.as_deref(), out)
        }
        Command::Gen { spec, output } => cmd_gen(&spec, output.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", describe(&f.err));
            f.code
        }
    }
}

/// The error chain, skipping causes the outer message already quotes.
fn describe(e: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !text.contains(&msg) {
            if !text.is_empty() {
                text.push_str(": ");
            }
            text.push_str(&msg);
        }
    }
    text
}

fn load(path: &Path) -> Result<StatementInstance, Failure> {
    load_instance(path).map_err(|e| usage(e.into()))
}

fn emit(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("json values serialize");
    writeln!(out, "{text}").map_err(|e| usage(e.into()))
}

fn kind_name(k: StatementKind) -> &'static str {
    match k {
        StatementKind::Ev => "ev",
        StatementKind::Tax => "tax",
    }
}

fn cmd_check(path: &Path, out: &mut dyn Write) -> CmdResult {
    let inst = load(path)?;
    let mut built = build(&inst, &Honest).map_err(|e| invariant(e.into()))?;
    if let Err(gate) = built.cs.check_domain_monotonicity() {
        return Err(invariant(anyhow!("gate {gate} has a less private domain than its inputs")));
    }
    let report = built.check().map_err(|e| invariant(e.into()))?;
    let oracle = inst.oracle();
    let digest = inst.ad.trail_digest(&inst.trail).map_err(|e| invariant(e.into()))?;
    let hash_matches = digest == inst.h_ex;
    emit(
        out,
        &json!({
            "kind": kind_name(inst.kind()),
            "satisfied": report.satisfied,
            "first_failed_assertion": report.first_failed_assertion,
            "oracle": oracle,
            "hash_matches": hash_matches,
            "n_mul": report.counters.n_mul,
            "n_add": report.counters.n_add,
            "n_assert": report.counters.n_assert,
            "n_prover_inputs": report.counters.n_prover_inputs,
            "n_shared_inputs": report.counters.n_shared_inputs,
        }),
    )?;
    if report.satisfied != (oracle && hash_matches) {
        return Err(invariant(anyhow!(
            "circuit says {} but plaintext verdict is {} (hash matches: {hash_matches})",
            report.satisfied,
            oracle
        )));
    }
    Ok(if report.satisfied { EXIT_OK } else { EXIT_UNSATISFIED })
}

fn cmd_oracle(path: &Path, out: &mut dyn Write) -> CmdResult {
    let inst = load(path)?;
    let pts = &inst.trail.points;
    let verdict = inst.oracle();
    let detail = match (&inst.ad.policy, &inst.ad.geometry) {
        (Policy::Subsidy(p), Geometry::Circles(c)) => {
            let (tot, cc) = ev_totals(pts, c);
            json!({ "tot": tot.to_string(), "cc": cc.to_string(), "d_req": p.d_req, "p_req": p.p_req })
        }
        (Policy::Tax(p), Geometry::Triangles { triangles, .. }) => {
            let (tot, hw) = tax_totals(pts, triangles);
            json!({ "tot": tot.to_string(), "hw": hw.to_string(), "d_max": p.d_max })
        }
        _ => return Err(invariant(anyhow!("validated instance mixes statement kinds"))),
    };
    emit(out, &json!({ "kind": kind_name(inst.kind()), "verdict": verdict, "detail": detail }))?;
    Ok(if verdict { EXIT_OK } else { EXIT_UNSATISFIED })
}

#[derive(Clone, Debug)]
enum Mutation {
    Root { seg: usize, d: u128 },
    TriangleIndex { point: usize, t: usize },
    Bcoords { point: usize, bc: BaryCoords },
    TrailPoint { point: usize, to: Point },
    Hash,
}

impl Mutation {
    fn name(&self) -> &'static str {
        match self {
            Mutation::Root { .. } => "root",
            Mutation::TriangleIndex { .. } => "triangle_index",
            Mutation::Bcoords { .. } => "bcoords",
            Mutation::TrailPoint { .. } => "trail_point",
            Mutation::Hash => "hash",
        }
    }

    /// Mutations that change the hashed trail must never be accepted.
    fn breaks_binding(&self) -> bool {
        matches!(self, Mutation::TrailPoint { .. } | Mutation::Hash)
    }
}

fn random_mutation(inst: &StatementInstance, rng: &mut impl Rng) -> Mutation {
    let pts = &inst.trail.points;
    let n = pts.len();
    let bound = 1i64 << inst.ad.params.coord_bits();
    let choices = if inst.kind() == StatementKind::Tax { 5 } else { 3 };
    match rng.gen_range(0..choices) {
        0 if n > 1 => {
            let seg = rng.gen_range(0..n - 1);
            let honest = segment_lengths(pts)[seg];
            let delta = rng.gen_range(1..=3u128);
            let d = if rng.gen_bool(0.5) || honest < delta { honest + delta } else { honest - delta };
            Mutation::Root { seg, d }
        }
        1 => {
            let point = rng.gen_range(0..n);
            let p = pts[point];
            let (dx, dy) = [(1, 0), (-1, 0), (0, 1), (0, -1)][rng.gen_range(0..4)];
            let to = Point::new((p.x + dx).rem_euclid(bound), (p.y + dy).rem_euclid(bound));
            Mutation::TrailPoint { point, to }
        }
        3 | 4 => {
            let Geometry::Triangles { triangles, .. } = &inst.ad.geometry else { unreachable!() };
            let point = rng.gen_range(0..n);
            let p = pts[point];
            let honest = find_triangle(p.x, p.y, triangles);
            if rng.gen_bool(0.5) {
                let mut t = rng.gen_range(0..=triangles.len() + 1);
                if t == honest {
                    t = (t + 1) % (triangles.len() + 2);
                }
                Mutation::TriangleIndex { point, t }
            } else {
                let tri = &triangles[honest.clamp(1, triangles.len()) - 1];
                let bc = get_bcoords(p.x, p.y, tri).unwrap_or(BaryCoords { s: 0, t: 0 });
                let (ds, dt) = [(1, 0), (0, 1), (1, -1), (-1, 1), (-1, 0), (0, -1)][rng.gen_range(0..6)];
                Mutation::Bcoords { point, bc: BaryCoords { s: bc.s + ds, t: bc.t + dt } }
            }
        }
        _ => Mutation::Hash,
    }
}

fn cmd_fuzz(path: &Path, mutations: usize, seed: u64, out: &mut dyn Write) -> CmdResult {
    let inst = load(path)?;
    let oracle = inst.oracle();
    let honest = build(&inst, &Honest).and_then(|mut b| Ok(b.check()?)).map_err(|e| invariant(e.into()))?;
    let hash_ok = inst.ad.trail_digest(&inst.trail).map(|h| h == inst.h_ex).unwrap_or(false);
    let mut violations = Vec::new();
    if honest.satisfied != (oracle && hash_ok) {
        violations.push(json!({ "mutation": "none", "detail": "honest witness disagrees with the plaintext verdict" }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut accepted, mut rejected, mut invalid) = (0usize, 0usize, 0usize);
    for i in 0..mutations {
        let m = random_mutation(&inst, &mut rng);
        let mut target = inst.clone();
        let mut o = WitnessOverrides::default();
        match &m {
            Mutation::Root { seg, d } => o.segment_lengths.push((*seg, *d)),
            Mutation::TriangleIndex { point, t } => o.triangle_indices.push((*point, *t)),
            Mutation::Bcoords { point, bc } => o.bcoords.push((*point, *bc)),
            Mutation::TrailPoint { point, to } => {
                let mut pts = inst.trail.points.clone();
                pts[*point] = *to;
                target = inst.with_trail(Trail::new(pts));
            }
            Mutation::Hash => target.h_ex = inst.ad.params.field().add(inst.h_ex, FieldElement::ONE),
        }
        if target.validate().is_err() {
            invalid += 1;
            continue;
        }
        let strategy: &dyn ProverStrategy = &o;
        let sat = build(&target, strategy).and_then(|mut b| Ok(b.check()?)).map_err(|e| invariant(e.into()))?.satisfied;
        if sat {
            accepted += 1;
        } else {
            rejected += 1;
        }
        if sat && (!oracle || !hash_ok || m.breaks_binding()) {
            violations.push(json!({ "index": i, "mutation": m.name(), "detail": format!("{m:?}") }));
        }
    }
    emit(
        out,
        &json!({
            "kind": kind_name(inst.kind()),
            "oracle": oracle,
            "honest_satisfied": honest.satisfied,
            "mutations": mutations,
            "accepted": accepted,
            "rejected": rejected,
            "invalid": invalid,
            "violations": violations,
        }),
    )?;
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_INVARIANT })
}

fn cmd_cost(
    kind: StatementKind,
    n_traj: &[usize],
    n_circ: &[usize],
    n_tri: &[usize],
    csv: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let n_geo = match kind {
        StatementKind::Ev if !n_tri.is_empty() => return Err(usage(anyhow!("--n-tri applies to --kind tax"))),
        StatementKind::Tax if !n_circ.is_empty() => return Err(usage(anyhow!("--n-circ applies to --kind ev"))),
        StatementKind::Ev => n_circ,
        StatementKind::Tax => n_tri,
    };
    if n_geo.is_empty() {
        return Err(usage(anyhow!("give --n-circ (ev) or --n-tri (tax)")));
    }
    let params = FieldParams::default();
    let pp = PoseidonParams::default_for(params.field());
    let mut rows = Vec::new();
    for &nt in n_traj {
        for &ng in n_geo {
            let c = statement_cost(kind, nt, ng, params, &pp).map_err(|e| usage(e.into()))?;
            rows.push((nt, ng, c));
        }
    }
    let io = |e: std::io::Error| usage(e.into());
    let k = kind_name(kind);
    if csv {
        writeln!(out, "kind,n_traj,n_geo,n_mul,n_add,n_assert,n_prover_inputs").map_err(io)?;
        for (nt, ng, c) in rows {
            writeln!(out, "{k},{nt},{ng},{},{},{},{}", c.n_mul, c.n_add, c.n_assert, c.n_prover_inputs).map_err(io)?;
        }
    } else {
        writeln!(
            out,
            "{:<5} {:>7} {:>6} {:>10} {:>10} {:>10} {:>15}",
            "kind", "n_traj", "n_geo", "n_mul", "n_add", "n_assert", "n_prover_inputs"
        )
        .map_err(io)?;
        for (nt, ng, c) in rows {
            writeln!(
                out,
                "{k:<5} {nt:>7} {ng:>6} {:>10} {:>10} {:>10} {:>15}",
                c.n_mul, c.n_add, c.n_assert, c.n_prover_inputs
            )
            .map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_tamper(spec: &str, inst: &StatementInstance) -> anyhow::Result<Tamper> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.parse::<i64>().with_context(|| format!("bad number {s:?} in tamper {spec:?}"));
    Ok(match parts.as_slice() {
        ["passthrough"] => Tamper::Passthrough,
        ["replace-point", i, x, y] => {
            Tamper::ReplacePoint { index: num(i)? as usize, point: Point::new(num(x)?, num(y)?) }
        }
        ["flip-sig", bit] => Tamper::FlipSignatureBit(num(bit)? as usize),
        ["force-output", "ok"] => Tamper::ForceOutput(Outcome::Ok),
        ["force-output", "not_ok" | "not-ok"] => Tamper::ForceOutput(Outcome::NotOk),
        ["bump-hash"] => Tamper::ReplaceHash(inst.ad.params.field().add(inst.h_ex, FieldElement::ONE)),
        ["bump-policy"] => {
            let mut ad = inst.ad.clone();
            match &mut ad.policy {
                Policy::Subsidy(p) => p.d_req += 1,
                Policy::Tax(p) => p.d_max += 1,
            }
            Tamper::ReplaceAd(Box::new(ad))
        }
        ["drop", kind] => Tamper::Drop(match *kind {
            "sig" => MessageKind::Sig,
            "prove-witness" => MessageKind::ProveWitness,
            "prove-query" => MessageKind::ProveQuery,
            "output" => MessageKind::Output,
            "getcoords" => MessageKind::GetCoords,
            other => bail!("unknown message kind {other:?}"),
        }),
        _ => bail!("unknown tamper {spec:?}"),
    })
}

fn default_tamper(scenario: ScenarioArg, inst: &StatementInstance) -> Option<Tamper> {
    match scenario {
        ScenarioArg::Honest => None,
        ScenarioArg::CorruptProver => {
            // Substitute the first point while reusing the device signature.
            let p = inst.trail.points[0];
            let bound = 1i64 << inst.ad.params.coord_bits();
            let x = if p.x + 1 < bound { p.x + 1 } else { p.x - 1 };
            Some(Tamper::ReplacePoint { index: 0, point: Point::new(x, p.y) })
        }
        ScenarioArg::CorruptVerifier => parse_tamper("bump-policy", inst).ok(),
    }
}

fn cmd_session(
    scenario: ScenarioArg,
    instance: Option<&Path>,
    seed: u64,
    sid: String,
    tamper: Option<&str>,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let inst = match instance {
        Some(p) => load(p)?,
        None => {
            let spec = FixtureSpec::new(StatementKind::Ev, FixtureMode::Compliant, seed, 32, 4);
            generate_instance(&spec).map_err(|e| invariant(e.into()))?
        }
    };
    let tamper = match tamper {
        Some(_) if scenario == ScenarioArg::Honest => {
            return Err(usage(anyhow!("--tamper needs a corrupt-prover or corrupt-verifier scenario")))
        }
        Some(t) => Some(parse_tamper(t, &inst).map_err(usage)?),
        None => default_tamper(scenario, &inst),
    };
    let scen = match scenario {
        ScenarioArg::Honest => Scenario::honest(),
        ScenarioArg::CorruptProver => Scenario::corrupt_prover(tamper.expect("default exists")),
        ScenarioArg::CorruptVerifier => Scenario::corrupt_verifier(tamper.expect("default exists")),
    };
    let inputs = SessionInputs::from_instance(&inst, sid, seed);
    let transcript = run_session(&scen, &inputs).map_err(|e| usage(e.into()))?;
    let json = transcript.to_json();
    match output {
        Some(p) => {
            fs::write(p, format!("{json}\n")).with_context(|| format!("writing {}", p.display())).map_err(usage)?
        }
        None => writeln!(out, "{json}").map_err(|e| usage(e.into()))?,
    }
    if transcript.audit_violations > 0 {
        return Err(invariant(anyhow!("verifier read {} prover-only values", transcript.audit_violations)));
    }
    let ideal = ideal_outputs(&scen, &inputs).map_err(|e| invariant(e.into()))?;
    let real = (transcript.prover_output(), transcript.verifier_output());
    if real != (ideal.prover, ideal.verifier) {
        return Err(invariant(anyhow!("session outputs {real:?} differ from the ideal functionality")));
    }
    let honest_verifier_ok =
        scen.corruption().ok() != Some(Corruption::Verifier) && transcript.verifier_output().is_ok();
    if honest_verifier_ok && !inst.oracle() {
        return Err(invariant(anyhow!("honest verifier accepted a non-compliant trail")));
    }
    Ok(EXIT_OK)
}

fn cmd_gen(spec_path: &Path, output: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let text =
        fs::read_to_string(spec_path).with_context(|| format!("reading {}", spec_path.display())).map_err(usage)?;
    let spec: FixtureSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing fixture spec {}", spec_path.display()))
        .map_err(usage)?;
    let doc = gen_fixture(&spec).map_err(|e| usage(e.into()))?;
    let json = serde_json::to_string_pretty(&doc).expect("instance documents serialize");
    match output {
        Some(p) => {
            fs::write(p, format!("{json}\n")).with_context(|| format!("writing {}", p.display())).map_err(usage)?
        }
        None => writeln!(out, "{json}").map_err(|e| usage(e.into()))?,
    }
    Ok(EXIT_OK)
}
