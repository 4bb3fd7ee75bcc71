//! Deterministic scheduler, scenarios and transcripts.
//!
//! A session runs in three phases, each until the message queue is empty:
//! `init`, one `move` per trail point, then `prove`/`verify`. Messages are
//! delivered first-in first-out. A party still without an output when the
//! queue runs dry answers `not_ok`.
//!
//! # Transcript JSON
//!
//! ```text
//! { "schema_version": 1, "sid": "...", "seed": 7,
//!   "scenario": { "corrupted": "none" | "prover" | "verifier", "tamper": "..." },
//!   "signature_scheme": "schnorr-2048",
//!   "entries": [ { "step": 0, "from": "environment", "to": "witness",
//!                  "tampered": false, "dropped": false,
//!                  "msg": { "type": "init", "sid": "..." } }, ... ],
//!   "errors": [ { "step": 3, "party": "prover", "error": "..." } ],
//!   "fzk": { "statement_match": true, "satisfied": true, ... } | null,
//!   "outputs": { "prover": "ok" | "not_ok", "verifier": "ok" | "not_ok" },
//!   "quiescent": [ "verifier" ],
//!   "audit_violations": 0 }
//! ```
//!
//! Field elements are decimal strings, byte strings lowercase hex, points
//! `[x, y]`, and authority data appears as the hex SHA-256 fingerprint from
//! [`super::ad_fingerprint`].

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use super::machines::{Fzk, FzkRecord, ProverMachine, VerifierMachine, WitnessDevice};
use super::{
    ad_fingerprint, Envelope, Message, MessageKind, Outcome, Party, ProtocolError, Schnorr, SessionId, SignatureScheme,
    TrailHasher, WitnessOverrides,
};
use crate::circuit::AccessAudit;
use crate::field::FieldElement;
use crate::geometry::Point;
use crate::statements::{AuthorityData, StatementInstance};

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;

/// Upper bound on deliveries per session; guards against tamper functions
/// that keep generating traffic.
const MAX_STEPS: usize = 100_000;

/// Everything the environment feeds into a session.
#[derive(Clone, Debug)]
pub struct SessionInputs {
    pub sid: SessionId,
    pub seed: u64,
    pub trail: Vec<Point>,
    pub ad_p: AuthorityData,
    pub ad_v: AuthorityData,
    /// Hash configuration of the Witness device.
    pub hasher: TrailHasher,
}

impl SessionInputs {
    pub fn new(sid: impl Into<String>, seed: u64, trail: Vec<Point>, ad: AuthorityData) -> Self {
        Self {
            sid: SessionId::new(sid),
            seed,
            trail,
            hasher: TrailHasher::for_authority(&ad),
            ad_v: ad.clone(),
            ad_p: ad,
        }
    }

    pub fn from_instance(inst: &StatementInstance, sid: impl Into<String>, seed: u64) -> Self {
        Self::new(sid, seed, inst.trail.points.clone(), inst.ad.clone())
    }

    pub fn with_verifier_ad(mut self, ad: AuthorityData) -> Self {
        self.ad_v = ad;
        self
    }
}

type TamperFn = dyn Fn(Envelope) -> Vec<Envelope> + Send + Sync;

/// Rewrites the outgoing messages of a corrupted machine. Messages to the
/// adversary itself are never rewritten.
#[derive(Clone)]
pub enum Tamper {
    Passthrough,
    /// Replace one point of the submitted witness trail.
    ReplacePoint {
        index: usize,
        point: Point,
    },
    ReplaceTrail(Vec<Point>),
    /// Replace `h` wherever the machine sends it.
    ReplaceHash(FieldElement),
    /// Replace the authority data submitted to the ZK functionality.
    ReplaceAd(Box<AuthorityData>),
    /// Flip bit `i` (counted from the first byte's low bit) of the signature.
    FlipSignatureBit(usize),
    Witness(WitnessOverrides),
    ForceOutput(Outcome),
    Drop(MessageKind),
    Chain(Vec<Tamper>),
    Custom {
        label: String,
        f: Arc<TamperFn>,
    },
}

impl fmt::Debug for Tamper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Tamper {
    pub fn custom(label: impl Into<String>, f: impl Fn(Envelope) -> Vec<Envelope> + Send + Sync + 'static) -> Self {
        Tamper::Custom { label: label.into(), f: Arc::new(f) }
    }

    pub fn label(&self) -> String {
        match self {
            Tamper::Passthrough => "passthrough".into(),
            Tamper::ReplacePoint { index, point } => format!("replace_point({index}, [{}, {}])", point.x, point.y),
            Tamper::ReplaceTrail(t) => format!("replace_trail(len {})", t.len()),
            Tamper::ReplaceHash(h) => format!("replace_hash({h})"),
            Tamper::ReplaceAd(ad) => format!("replace_ad({})", hex::encode(&ad_fingerprint(ad)[..8])),
            Tamper::FlipSignatureBit(i) => format!("flip_signature_bit({i})"),
            Tamper::Witness(_) => "witness_overrides".into(),
            Tamper::ForceOutput(o) => format!("force_output({})", if o.is_ok() { "ok" } else { "not_ok" }),
            Tamper::Drop(k) => format!("drop({k:?})"),
            Tamper::Chain(ts) => ts.iter().map(Tamper::label).collect::<Vec<_>>().join(" + "),
            Tamper::Custom { label, .. } => format!("custom({label})"),
        }
    }

    pub fn apply(&self, env: Envelope) -> Vec<Envelope> {
        let mut env = env;
        match self {
            Tamper::Passthrough => {}
            Tamper::ReplacePoint { index, point } => {
                if let Message::ProveWitness { trail, .. } = &mut env.msg {
                    if let Some(p) = trail.get_mut(*index) {
                        *p = *point;
                    }
                }
            }
            Tamper::ReplaceTrail(new) => {
                if let Message::ProveWitness { trail, .. } = &mut env.msg {
                    trail.clone_from(new);
                }
            }
            Tamper::ReplaceHash(new) => match &mut env.msg {
                Message::Sig { h, .. } | Message::ProveWitness { h, .. } | Message::ProveQuery { h, .. } => *h = *new,
                _ => {}
            },
            Tamper::ReplaceAd(new) => match &mut env.msg {
                Message::ProveWitness { ad, .. } | Message::ProveQuery { ad, .. } => *ad = (**new).clone(),
                _ => {}
            },
            Tamper::FlipSignatureBit(i) => {
                if let Message::Sig { sigma, .. } = &mut env.msg {
                    if let Some(b) = sigma.get_mut(i / 8) {
                        *b ^= 1 << (i % 8);
                    }
                }
            }
            Tamper::Witness(o) => {
                if let Message::ProveWitness { overrides, .. } = &mut env.msg {
                    overrides.clone_from(o);
                }
            }
            Tamper::ForceOutput(o) => {
                if let Message::Output { outcome, .. } = &mut env.msg {
                    *outcome = *o;
                }
            }
            Tamper::Drop(kind) => {
                if env.msg.kind() == *kind {
                    return vec![];
                }
            }
            Tamper::Chain(ts) => {
                let mut cur = vec![env];
                for t in ts {
                    cur = cur.into_iter().flat_map(|e| t.apply(e)).collect();
                }
                return cur;
            }
            Tamper::Custom { f, .. } => return f(env),
        }
        vec![env]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    None,
    Prover,
    Verifier,
}

/// Which machine (if any) the adversary controls, and how it rewrites that
/// machine's messages.
#[derive(Clone, Debug, Default)]
pub struct Scenario {
    pub prover: Option<Tamper>,
    pub verifier: Option<Tamper>,
}

impl Scenario {
    pub fn honest() -> Self {
        Self::default()
    }

    pub fn corrupt_prover(t: Tamper) -> Self {
        Self { prover: Some(t), verifier: None }
    }

    pub fn corrupt_verifier(t: Tamper) -> Self {
        Self { prover: None, verifier: Some(t) }
    }

    pub fn corruption(&self) -> Result<Corruption, ProtocolError> {
        match (&self.prover, &self.verifier) {
            (None, None) => Ok(Corruption::None),
            (Some(_), None) => Ok(Corruption::Prover),
            (None, Some(_)) => Ok(Corruption::Verifier),
            (Some(_), Some(_)) => Err(ProtocolError::InvalidScenario),
        }
    }

    pub fn tamper(&self) -> Option<&Tamper> {
        self.prover.as_ref().or(self.verifier.as_ref())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioLabel {
    pub corrupted: Corruption,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tamper: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub step: usize,
    pub from: Party,
    pub to: Party,
    pub tampered: bool,
    pub dropped: bool,
    #[serde(serialize_with = "ser_message")]
    pub msg: Message,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorRecord {
    pub step: usize,
    pub party: Party,
    pub error: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Outputs {
    pub prover: Outcome,
    pub verifier: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionTranscript {
    pub schema_version: u32,
    pub sid: SessionId,
    pub seed: u64,
    pub scenario: ScenarioLabel,
    pub signature_scheme: String,
    pub entries: Vec<Entry>,
    pub errors: Vec<ErrorRecord>,
    pub fzk: Option<FzkRecord>,
    pub outputs: Outputs,
    pub quiescent: Vec<Party>,
    pub audit_violations: usize,
}

impl SessionTranscript {
    pub fn prover_output(&self) -> Outcome {
        self.outputs.prover
    }

    pub fn verifier_output(&self) -> Outcome {
        self.outputs.verifier
    }

    /// Delivered messages of one kind.
    pub fn delivered(&self, kind: MessageKind) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(move |e| !e.dropped && e.msg.kind() == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }
}

pub fn run_session(scenario: &Scenario, inputs: &SessionInputs) -> Result<SessionTranscript, ProtocolError> {
    run_session_with(Arc::new(Schnorr), scenario, inputs)
}

pub fn run_session_with(
    scheme: Arc<dyn SignatureScheme>,
    scenario: &Scenario,
    inputs: &SessionInputs,
) -> Result<SessionTranscript, ProtocolError> {
    let corruption = scenario.corruption()?;
    let sid = inputs.sid.clone();
    let audit = AccessAudit::new();
    let mut run = Run {
        witness: WitnessDevice::new(scheme.clone(), inputs.hasher.clone(), &inputs.seed.to_be_bytes()),
        prover: ProverMachine::new(scheme.clone(), sid.clone(), corruption == Corruption::Prover),
        verifier: VerifierMachine::new(scheme.clone(), sid.clone(), corruption == Corruption::Verifier),
        fzk: Fzk::new(sid.clone(), audit.clone()),
        scenario,
        queue: VecDeque::new(),
        entries: Vec::new(),
        errors: Vec::new(),
        prover_out: None,
        verifier_out: None,
    };

    let env = |to, msg| Envelope::new(Party::Environment, to, msg);
    run.post(env(Party::Witness, Message::Init { sid: sid.clone() }));
    run.drain();
    for &point in &inputs.trail {
        run.post(env(Party::Witness, Message::Move { sid: sid.clone(), point }));
    }
    run.drain();
    run.post(env(Party::Prover, Message::Prove { sid: sid.clone(), ad: inputs.ad_p.clone() }));
    run.post(env(Party::Verifier, Message::Verify { sid: sid.clone(), ad: inputs.ad_v.clone() }));
    run.drain();

    let mut quiescent = Vec::new();
    if let Some(e) = run.prover.quiesce() {
        quiescent.push(Party::Prover);
        run.send(e);
    }
    if let Some(e) = run.verifier.quiesce() {
        quiescent.push(Party::Verifier);
        run.send(e);
    }
    run.drain();

    Ok(SessionTranscript {
        schema_version: TRANSCRIPT_SCHEMA_VERSION,
        sid,
        seed: inputs.seed,
        scenario: ScenarioLabel { corrupted: corruption, tamper: scenario.tamper().map(Tamper::label) },
        signature_scheme: scheme.name().to_string(),
        fzk: run.fzk.record().cloned(),
        outputs: Outputs {
            prover: run.prover_out.unwrap_or(Outcome::NotOk),
            verifier: run.verifier_out.unwrap_or(Outcome::NotOk),
        },
        entries: run.entries,
        errors: run.errors,
        quiescent,
        audit_violations: audit.violations(),
    })
}

struct Run<'a> {
    witness: WitnessDevice,
    prover: ProverMachine,
    verifier: VerifierMachine,
    fzk: Fzk,
    scenario: &'a Scenario,
    queue: VecDeque<(Envelope, bool)>,
    entries: Vec<Entry>,
    errors: Vec<ErrorRecord>,
    prover_out: Option<Outcome>,
    verifier_out: Option<Outcome>,
}

impl Run<'_> {
    fn post(&mut self, e: Envelope) {
        self.queue.push_back((e, false));
    }

    /// Queues a machine's outgoing message, through the tamper function if
    /// the sender is corrupted.
    fn send(&mut self, e: Envelope) {
        let tamper = match e.from {
            Party::Prover => self.scenario.prover.as_ref(),
            Party::Verifier => self.scenario.verifier.as_ref(),
            _ => None,
        };
        match tamper {
            Some(t) if e.to != Party::Adversary => {
                let out = t.apply(e.clone());
                if out.is_empty() {
                    let step = self.entries.len();
                    self.entries.push(Entry {
                        step,
                        from: e.from,
                        to: e.to,
                        tampered: true,
                        dropped: true,
                        msg: e.msg.clone(),
                    });
                }
                for o in out {
                    let changed = o != e;
                    self.queue.push_back((o, changed));
                }
            }
            _ => self.queue.push_back((e, false)),
        }
    }

    fn drain(&mut self) {
        while let Some((e, tampered)) = self.queue.pop_front() {
            let step = self.entries.len();
            if step >= MAX_STEPS {
                self.errors.push(ErrorRecord { step, party: e.to, error: "step limit reached".into() });
                self.queue.clear();
                return;
            }
            self.entries.push(Entry { step, from: e.from, to: e.to, tampered, dropped: false, msg: e.msg.clone() });
            let result = match e.to {
                Party::Witness => self.witness.handle(e.from, e.msg),
                Party::Prover => self.prover.handle(e.from, e.msg),
                Party::Verifier => self.verifier.handle(e.from, e.msg),
                Party::Fzk => self.fzk.handle(e.from, e.msg),
                Party::Environment => {
                    if let Message::Output { outcome, .. } = e.msg {
                        let slot = match e.from {
                            Party::Prover => Some(&mut self.prover_out),
                            Party::Verifier => Some(&mut self.verifier_out),
                            _ => None,
                        };
                        if let Some(slot) = slot {
                            slot.get_or_insert(outcome);
                        }
                    }
                    Ok(vec![])
                }
                Party::Adversary => Ok(vec![]),
            };
            match result {
                Ok(out) => out.into_iter().for_each(|o| self.send(o)),
                Err(err) => self.errors.push(ErrorRecord { step, party: e.to, error: err.to_string() }),
            }
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum MessageView<'a> {
    Init {
        sid: &'a SessionId,
    },
    Move {
        sid: &'a SessionId,
        point: [i64; 2],
    },
    GetCoords {
        sid: &'a SessionId,
    },
    Coords {
        sid: &'a SessionId,
        trail: Vec<[i64; 2]>,
        sigma: String,
    },
    WitPk {
        sid: &'a SessionId,
        pk: String,
    },
    Prove {
        sid: &'a SessionId,
        ad: String,
    },
    Verify {
        sid: &'a SessionId,
        ad: String,
    },
    Sig {
        sid: &'a SessionId,
        h: String,
        sigma: String,
    },
    ProveWitness {
        sid: &'a SessionId,
        ad: String,
        h: String,
        trail: Vec<[i64; 2]>,
        #[serde(skip_serializing_if = "WitnessOverrides::is_empty")]
        overrides: &'a WitnessOverrides,
    },
    ProveQuery {
        sid: &'a SessionId,
        ad: String,
        h: String,
    },
    Proven {
        sid: &'a SessionId,
        shared: Vec<String>,
    },
    Output {
        sid: &'a SessionId,
        outcome: Outcome,
    },
    Leak {
        sid: &'a SessionId,
        #[serde(skip_serializing_if = "Option::is_none")]
        ad: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        h: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        trail: Option<Vec<[i64; 2]>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        sigma: Option<String>,
    },
}

fn pts(t: &[Point]) -> Vec<[i64; 2]> {
    t.iter().map(|p| [p.x, p.y]).collect()
}

fn fp(ad: &AuthorityData) -> String {
    hex::encode(ad_fingerprint(ad))
}

fn ser_message<S: Serializer>(m: &Message, s: S) -> Result<S::Ok, S::Error> {
    let v = match m {
        Message::Init { sid } => MessageView::Init { sid },
        Message::Move { sid, point } => MessageView::Move { sid, point: [point.x, point.y] },
        Message::GetCoords { sid } => MessageView::GetCoords { sid },
        Message::Coords { sid, trail, sigma } => {
            MessageView::Coords { sid, trail: pts(trail), sigma: hex::encode(sigma) }
        }
        Message::WitPk { sid, pk } => MessageView::WitPk { sid, pk: hex::encode(pk) },
        Message::Prove { sid, ad } => MessageView::Prove { sid, ad: fp(ad) },
        Message::Verify { sid, ad } => MessageView::Verify { sid, ad: fp(ad) },
        Message::Sig { sid, h, sigma } => MessageView::Sig { sid, h: h.to_string(), sigma: hex::encode(sigma) },
        Message::ProveWitness { sid, ad, h, trail, overrides } => {
            MessageView::ProveWitness { sid, ad: fp(ad), h: h.to_string(), trail: pts(trail), overrides }
        }
        Message::ProveQuery { sid, ad, h } => MessageView::ProveQuery { sid, ad: fp(ad), h: h.to_string() },
        Message::Proven { sid, shared } => {
            MessageView::Proven { sid, shared: shared.iter().map(|v| v.to_string()).collect() }
        }
        Message::Output { sid, outcome } => MessageView::Output { sid, outcome: *outcome },
        Message::Leak { sid, ad, h, trail, sigma } => MessageView::Leak {
            sid,
            ad: ad.as_ref().map(fp),
            h: h.map(|h| h.to_string()),
            trail: trail.as_deref().map(pts),
            sigma: sigma.as_deref().map(hex::encode),
        },
    };
    v.serialize(s)
}
