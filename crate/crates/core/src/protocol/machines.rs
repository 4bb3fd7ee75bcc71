//! The four machines of the real system.

use std::sync::Arc;

use serde::Serialize;

use super::{
    relation, signing_message, Envelope, Message, MessageKind, Outcome, Party, ProtocolError, SessionId,
    SignatureScheme, TrailHasher, WitnessOverrides,
};
use crate::circuit::{AccessAudit, Counters, Reader};
use crate::field::FieldElement;
use crate::geometry::Point;
use crate::statements::{build, AuthorityData, StatementInstance, Trail};

fn order(party: Party, kind: MessageKind, reason: &'static str) -> ProtocolError {
    ProtocolError::ProtocolOrderViolation { party, kind, reason }
}

fn unexpected(party: Party, msg: &Message) -> ProtocolError {
    ProtocolError::UnexpectedMessage { party, kind: msg.kind() }
}

fn check_sid(expected: &SessionId, msg: &Message) -> Result<(), ProtocolError> {
    if msg.sid() != expected {
        return Err(ProtocolError::SessionMismatch { expected: expected.clone(), got: msg.sid().clone() });
    }
    Ok(())
}

/// Tamper-evident GPS logger: keeps the trail and signs its digest.
pub struct WitnessDevice {
    scheme: Arc<dyn SignatureScheme>,
    hasher: TrailHasher,
    key_seed: Vec<u8>,
    sid: Option<SessionId>,
    keys: Option<(Vec<u8>, Vec<u8>)>,
    trail: Vec<Point>,
}

impl WitnessDevice {
    pub fn new(scheme: Arc<dyn SignatureScheme>, hasher: TrailHasher, key_seed: &[u8]) -> Self {
        Self { scheme, hasher, key_seed: key_seed.to_vec(), sid: None, keys: None, trail: Vec::new() }
    }

    pub fn pk(&self) -> Option<&[u8]> {
        self.keys.as_ref().map(|(pk, _)| pk.as_slice())
    }

    pub fn trail(&self) -> &[Point] {
        &self.trail
    }

    pub fn handle(&mut self, from: Party, msg: Message) -> Result<Vec<Envelope>, ProtocolError> {
        const ME: Party = Party::Witness;
        let kind = msg.kind();
        let Some(sid) = self.sid.clone() else {
            let Message::Init { sid } = msg else {
                return Err(order(ME, kind, "device not initialized"));
            };
            if from != Party::Environment {
                return Err(unexpected(ME, &Message::Init { sid }));
            }
            let mut seed = self.key_seed.clone();
            seed.extend_from_slice(sid.as_str().as_bytes());
            let keys = self.scheme.keygen(&seed);
            let pk = keys.0.clone();
            self.keys = Some(keys);
            self.sid = Some(sid.clone());
            return Ok(vec![
                Envelope::new(ME, Party::Prover, Message::WitPk { sid: sid.clone(), pk: pk.clone() }),
                Envelope::new(ME, Party::Verifier, Message::WitPk { sid, pk }),
            ]);
        };
        check_sid(&sid, &msg)?;
        match (from, msg) {
            (_, Message::Init { .. }) => Err(order(ME, kind, "device already initialized")),
            (Party::Environment, Message::Move { point, .. }) => {
                self.trail.push(point);
                Ok(vec![])
            }
            (Party::Prover, Message::GetCoords { .. }) => {
                if self.trail.is_empty() {
                    return Err(order(ME, kind, "no coordinates recorded"));
                }
                let h = self.hasher.digest(&self.trail)?;
                let (_, sk) = self.keys.as_ref().expect("keys exist after init");
                let sigma = self.scheme.sign(sk, &signing_message(&sid, h));
                Ok(vec![Envelope::new(ME, Party::Prover, Message::Coords { sid, trail: self.trail.clone(), sigma })])
            }
            (_, msg) => Err(unexpected(ME, &msg)),
        }
    }
}

/// Prover machine. When corrupted it leaks its view to the adversary and
/// always submits, leaving the decision to the tamper function.
pub struct ProverMachine {
    scheme: Arc<dyn SignatureScheme>,
    sid: SessionId,
    corrupted: bool,
    pk: Option<Vec<u8>>,
    ad: Option<AuthorityData>,
    output: Option<Outcome>,
}

impl ProverMachine {
    pub fn new(scheme: Arc<dyn SignatureScheme>, sid: SessionId, corrupted: bool) -> Self {
        Self { scheme, sid, corrupted, pk: None, ad: None, output: None }
    }

    pub fn output(&self) -> Option<Outcome> {
        self.output
    }

    pub fn handle(&mut self, from: Party, msg: Message) -> Result<Vec<Envelope>, ProtocolError> {
        const ME: Party = Party::Prover;
        check_sid(&self.sid, &msg)?;
        let kind = msg.kind();
        match (from, msg) {
            (Party::Witness, Message::WitPk { pk, .. }) => {
                self.pk = Some(pk);
                Ok(vec![])
            }
            (Party::Environment, Message::Prove { ad, .. }) => {
                if self.pk.is_none() {
                    return Err(order(ME, kind, "witness key not received"));
                }
                if self.ad.is_some() {
                    return Err(order(ME, kind, "proof already requested"));
                }
                self.ad = Some(ad);
                Ok(vec![Envelope::new(ME, Party::Witness, Message::GetCoords { sid: self.sid.clone() })])
            }
            (Party::Witness, Message::Coords { trail, sigma, .. }) => {
                let Some(ad) = self.ad.clone() else {
                    return Err(order(ME, kind, "coordinates before prove request"));
                };
                if self.output.is_some() {
                    return Err(order(ME, kind, "already answered"));
                }
                Ok(self.on_coords(ad, trail, sigma))
            }
            (_, msg) => Err(unexpected(ME, &msg)),
        }
    }

    fn on_coords(&mut self, ad: AuthorityData, trail: Vec<Point>, sigma: Vec<u8>) -> Vec<Envelope> {
        const ME: Party = Party::Prover;
        let sid = self.sid.clone();
        let pk = self.pk.as_deref().unwrap_or_default();
        let h = TrailHasher::for_authority(&ad).digest(&trail).ok();
        let sig_ok = h.is_some_and(|h| self.scheme.verify(pk, &signing_message(&sid, h), &sigma));
        let holds = sig_ok && relation(&ad, &trail);
        let mut out = Vec::new();
        if self.corrupted {
            out.push(Envelope::new(
                ME,
                Party::Adversary,
                Message::Leak {
                    sid: sid.clone(),
                    ad: Some(ad.clone()),
                    h,
                    trail: Some(trail.clone()),
                    sigma: Some(sigma.clone()),
                },
            ));
        }
        if let Some(h) = h.filter(|_| holds || self.corrupted) {
            out.push(Envelope::new(ME, Party::Verifier, Message::Sig { sid: sid.clone(), h, sigma }));
            out.push(Envelope::new(
                ME,
                Party::Fzk,
                Message::ProveWitness { sid: sid.clone(), ad, h, trail, overrides: WitnessOverrides::default() },
            ));
        }
        let outcome = Outcome::from_bool(holds);
        self.output = Some(outcome);
        out.push(Envelope::new(ME, Party::Environment, Message::Output { sid, outcome }));
        out
    }

    /// Output sent when the session goes quiet without an answer.
    pub fn quiesce(&mut self) -> Option<Envelope> {
        quiesce(&mut self.output, &self.sid, Party::Prover)
    }
}

fn quiesce(output: &mut Option<Outcome>, sid: &SessionId, me: Party) -> Option<Envelope> {
    if output.is_some() {
        return None;
    }
    *output = Some(Outcome::NotOk);
    Some(Envelope::new(me, Party::Environment, Message::Output { sid: sid.clone(), outcome: Outcome::NotOk }))
}

/// Verifier machine. It sees the statement only through the shared input
/// values returned by [`Fzk`].
pub struct VerifierMachine {
    scheme: Arc<dyn SignatureScheme>,
    sid: SessionId,
    corrupted: bool,
    pk: Option<Vec<u8>>,
    ad: Option<AuthorityData>,
    sig: Option<(FieldElement, Vec<u8>)>,
    queried: Option<FieldElement>,
    output: Option<Outcome>,
}

impl VerifierMachine {
    pub fn new(scheme: Arc<dyn SignatureScheme>, sid: SessionId, corrupted: bool) -> Self {
        Self { scheme, sid, corrupted, pk: None, ad: None, sig: None, queried: None, output: None }
    }

    pub fn output(&self) -> Option<Outcome> {
        self.output
    }

    pub fn handle(&mut self, from: Party, msg: Message) -> Result<Vec<Envelope>, ProtocolError> {
        const ME: Party = Party::Verifier;
        check_sid(&self.sid, &msg)?;
        let kind = msg.kind();
        match (from, msg) {
            (Party::Witness, Message::WitPk { pk, .. }) => {
                self.pk = Some(pk);
                Ok(vec![])
            }
            (Party::Environment, Message::Verify { ad, .. }) => {
                if self.pk.is_none() {
                    return Err(order(ME, kind, "witness key not received"));
                }
                if self.ad.is_some() {
                    return Err(order(ME, kind, "verification already requested"));
                }
                self.ad = Some(ad);
                Ok(self.progress())
            }
            (Party::Prover, Message::Sig { h, sigma, .. }) => {
                if self.sig.is_some() {
                    return Err(order(ME, kind, "signature already received"));
                }
                self.sig = Some((h, sigma));
                Ok(self.progress())
            }
            (Party::Fzk, Message::Proven { shared, .. }) => {
                let (Some(h), Some(ad)) = (self.queried, self.ad.as_ref()) else {
                    return Err(order(ME, kind, "proof without query"));
                };
                if self.output.is_some() {
                    return Err(order(ME, kind, "already answered"));
                }
                let outcome = Outcome::from_bool(shared == ad.expected_shared_inputs(h));
                self.output = Some(outcome);
                Ok(vec![Envelope::new(ME, Party::Environment, Message::Output { sid: self.sid.clone(), outcome })])
            }
            (_, msg) => Err(unexpected(ME, &msg)),
        }
    }

    fn progress(&mut self) -> Vec<Envelope> {
        const ME: Party = Party::Verifier;
        let (Some(ad), Some((h, sigma))) = (self.ad.clone(), self.sig.clone()) else {
            return vec![];
        };
        if self.queried.is_some() || self.output.is_some() {
            return vec![];
        }
        let sid = self.sid.clone();
        let mut out = Vec::new();
        if self.corrupted {
            out.push(Envelope::new(
                ME,
                Party::Adversary,
                Message::Leak { sid: sid.clone(), ad: Some(ad.clone()), h: Some(h), trail: None, sigma: None },
            ));
        }
        let pk = self.pk.as_deref().unwrap_or_default();
        if self.scheme.verify(pk, &signing_message(&sid, h), &sigma) {
            self.queried = Some(h);
            out.push(Envelope::new(ME, Party::Fzk, Message::ProveQuery { sid, ad, h }));
        } else {
            self.output = Some(Outcome::NotOk);
            out.push(Envelope::new(ME, Party::Environment, Message::Output { sid, outcome: Outcome::NotOk }));
        }
        out
    }

    pub fn quiesce(&mut self) -> Option<Envelope> {
        quiesce(&mut self.output, &self.sid, Party::Verifier)
    }
}

/// What the ZK functionality did with a submission.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FzkRecord {
    /// Prover's statement `(AD, h)` equals the Verifier's.
    pub statement_match: bool,
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failed_assertion: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counters: Option<Counters>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Submission {
    ad: AuthorityData,
    h: FieldElement,
    trail: Vec<Point>,
    overrides: WitnessOverrides,
}

/// Zero-knowledge functionality for the statement relation, realized by
/// building the circuit and checking it.
pub struct Fzk {
    sid: SessionId,
    audit: AccessAudit,
    witness: Option<Submission>,
    query: Option<(AuthorityData, FieldElement)>,
    record: Option<FzkRecord>,
}

impl Fzk {
    pub fn new(sid: SessionId, audit: AccessAudit) -> Self {
        Self { sid, audit, witness: None, query: None, record: None }
    }

    pub fn record(&self) -> Option<&FzkRecord> {
        self.record.as_ref()
    }

    pub fn handle(&mut self, from: Party, msg: Message) -> Result<Vec<Envelope>, ProtocolError> {
        const ME: Party = Party::Fzk;
        check_sid(&self.sid, &msg)?;
        let kind = msg.kind();
        match (from, msg) {
            (Party::Prover, Message::ProveWitness { ad, h, trail, overrides, .. }) => {
                if self.witness.is_some() {
                    return Err(order(ME, kind, "witness already submitted"));
                }
                self.witness = Some(Submission { ad, h, trail, overrides });
            }
            (Party::Verifier, Message::ProveQuery { ad, h, .. }) => {
                if self.query.is_some() {
                    return Err(order(ME, kind, "query already submitted"));
                }
                self.query = Some((ad, h));
            }
            (_, msg) => return Err(unexpected(ME, &msg)),
        }
        Ok(self.try_prove())
    }

    fn try_prove(&mut self) -> Vec<Envelope> {
        let (Some(w), Some((ad_v, h_v))) = (&self.witness, &self.query) else {
            return vec![];
        };
        if self.record.is_some() {
            return vec![];
        }
        let mut rec = FzkRecord {
            statement_match: w.ad == *ad_v && w.h == *h_v,
            satisfied: false,
            first_failed_assertion: None,
            counters: None,
            error: None,
        };
        if !rec.statement_match {
            self.record = Some(rec);
            return vec![];
        }
        let inst = StatementInstance { ad: w.ad.clone(), h_ex: w.h, trail: Trail::new(w.trail.clone()) };
        let checked = inst.validate().and_then(|_| build(&inst, &w.overrides)).and_then(|mut built| {
            built.cs.attach_audit(self.audit.clone());
            let report = built.check()?;
            Ok((built, report))
        });
        let mut out = Vec::new();
        match checked {
            Err(e) => rec.error = Some(e.to_string()),
            Ok((built, report)) => {
                rec.satisfied = report.satisfied;
                rec.first_failed_assertion = report.first_failed_assertion;
                rec.counters = Some(report.counters);
                if report.satisfied {
                    let shared = built
                        .shared_inputs
                        .iter()
                        .map(|&w| built.cs.read(w, Reader::Verifier).unwrap_or_default())
                        .collect();
                    out.push(Envelope::new(
                        Party::Fzk,
                        Party::Verifier,
                        Message::Proven { sid: self.sid.clone(), shared },
                    ));
                }
            }
        }
        self.record = Some(rec);
        out
    }
}
