//! Executable model of the Witness device, Prover and Verifier machines,
//! with a deterministic scheduler, signatures over trail digests and
//! corruption hooks.
//!
//! The zero-knowledge functionality is realized by building the statement
//! circuit and checking it ([`machines::Fzk`]). The Verifier only ever sees
//! the shared input values of that circuit, read through
//! [`crate::circuit::Reader::Verifier`] with an [`crate::AccessAudit`]
//! attached.
//!
//! # Signed message
//!
//! The Witness device signs
//!
//! ```text
//! "zkpol-sig-v1" || u32_be(len(sid)) || sid || u32_be(16) || h
//! ```
//!
//! where `sid` is the UTF-8 session id and `h` the Poseidon digest of the
//! padded trail as 16 big-endian bytes (see [`signing_message`]).

pub mod ideal;
pub mod machines;
pub mod session;
pub mod signature;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::FieldElement;
use crate::gadgets::PoseidonParams;
use crate::geometry::Point;
use crate::localcalc::BaryCoords;
use crate::statements::{digest_trail, AuthorityData, Geometry, InstanceError, Policy, ProverStrategy, Trail};

pub use ideal::{
    ideal_outputs, ideal_outputs_with, AdversaryView, IdealAdversary, IdealFunctionality, IdealOutcome, Simulator,
};
pub use machines::{Fzk, FzkRecord, ProverMachine, VerifierMachine, WitnessDevice};
pub use session::{
    run_session, run_session_with, Corruption, Entry, Scenario, SessionInputs, SessionTranscript, Tamper,
    TRANSCRIPT_SCHEMA_VERSION,
};
pub use signature::{Schnorr, SchnorrGroup, SignatureScheme};

/// Session identifier carried by every message.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub String);

impl SessionId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    NotOk,
}

impl Outcome {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Outcome::Ok
        } else {
            Outcome::NotOk
        }
    }

    pub fn is_ok(self) -> bool {
        self == Outcome::Ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Environment,
    Witness,
    Prover,
    Verifier,
    Fzk,
    Adversary,
}

/// Hash configuration of the Witness device: the digest it signs is the
/// same one the statements use for `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrailHasher {
    pub pp: PoseidonParams,
    pub n_traj: usize,
}

impl TrailHasher {
    pub fn new(pp: PoseidonParams, n_traj: usize) -> Self {
        Self { pp, n_traj }
    }

    pub fn for_authority(ad: &AuthorityData) -> Self {
        Self { pp: ad.pp.clone(), n_traj: ad.n_traj }
    }

    pub fn digest(&self, trail: &[Point]) -> Result<FieldElement, InstanceError> {
        digest_trail(&self.pp, self.n_traj, &Trail::new(trail.to_vec()))
    }
}

/// Bytes the Witness device signs for session `sid` and digest `h`.
pub fn signing_message(sid: &SessionId, h: FieldElement) -> Vec<u8> {
    let sid = sid.as_str().as_bytes();
    let mut out = Vec::with_capacity(12 + 8 + sid.len() + 16);
    out.extend_from_slice(b"zkpol-sig-v1");
    out.extend_from_slice(&(sid.len() as u32).to_be_bytes());
    out.extend_from_slice(sid);
    out.extend_from_slice(&16u32.to_be_bytes());
    out.extend_from_slice(&h.to_be_bytes());
    out
}

/// The policy relation `R(S, AD)`: the trail is admissible for `ad` and the
/// plaintext verdict holds.
pub fn relation(ad: &AuthorityData, trail: &[Point]) -> bool {
    let trail = Trail::new(trail.to_vec());
    ad.validate().is_ok() && ad.validate_trail(&trail).is_ok() && ad.oracle(&trail)
}

/// SHA-256 over a canonical encoding of `ad`; used to name authority data in
/// transcripts.
pub fn ad_fingerprint(ad: &AuthorityData) -> [u8; 32] {
    fn int(h: &mut Sha256, v: i128) {
        h.update(v.to_be_bytes());
    }
    let mut h = Sha256::new();
    h.update(b"zkpol-ad-v1");
    h.update(ad.params.modulus().to_be_bytes());
    h.update(ad.params.coord_bits().to_be_bytes());
    h.update((ad.pp.seed().len() as u32).to_be_bytes());
    h.update(ad.pp.seed().as_bytes());
    for v in [ad.pp.t(), ad.pp.alpha() as usize, ad.pp.r_full(), ad.pp.r_partial(), ad.n_traj] {
        h.update((v as u64).to_be_bytes());
    }
    for c in ad.pp.round_constants().iter().chain(ad.pp.mds().iter().flatten()) {
        h.update(c.to_be_bytes());
    }
    match &ad.policy {
        Policy::Subsidy(p) => {
            h.update(b"ev");
            int(&mut h, p.d_req as i128);
            int(&mut h, p.p_req as i128);
        }
        Policy::Tax(p) => {
            h.update(b"tax");
            int(&mut h, p.d_max as i128);
        }
    }
    match &ad.geometry {
        Geometry::Circles(cs) => {
            h.update(b"circles");
            h.update((cs.len() as u64).to_be_bytes());
            for c in cs {
                for v in [c.center.x, c.center.y, c.radius] {
                    int(&mut h, v as i128);
                }
            }
        }
        Geometry::Triangles { triangles, region } => {
            h.update(b"triangles");
            h.update((triangles.len() as u64).to_be_bytes());
            for t in triangles {
                for v in t.0 {
                    int(&mut h, v.x as i128);
                    int(&mut h, v.y as i128);
                }
            }
            match region {
                None => h.update([0u8]),
                Some(r) => {
                    h.update([1u8]);
                    for v in [r.x0, r.y0, r.x1, r.y1] {
                        int(&mut h, v as i128);
                    }
                }
            }
        }
    }
    h.finalize().into()
}

/// Prover-chosen witness values that differ from the honest ones, keyed by
/// segment or point index. Applied when the circuit is built inside
/// [`Fzk`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessOverrides {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segment_lengths: Vec<(usize, u128)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triangle_indices: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bcoords: Vec<(usize, BaryCoords)>,
}

impl WitnessOverrides {
    pub fn is_empty(&self) -> bool {
        self.segment_lengths.is_empty() && self.triangle_indices.is_empty() && self.bcoords.is_empty()
    }
}

fn lookup<K: PartialEq + Copy, V: Copy>(table: &[(K, V)], key: K) -> Option<V> {
    table.iter().rev().find(|(k, _)| *k == key).map(|&(_, v)| v)
}

impl ProverStrategy for WitnessOverrides {
    fn segment_length(&self, seg: usize, honest: u128) -> u128 {
        lookup(&self.segment_lengths, seg).unwrap_or(honest)
    }

    fn triangle_index(&self, point: usize, honest: usize) -> usize {
        lookup(&self.triangle_indices, point).unwrap_or(honest)
    }

    fn bcoords(&self, point: usize, honest: BaryCoords) -> BaryCoords {
        lookup(&self.bcoords, point).unwrap_or(honest)
    }
}

/// Messages exchanged between the machines and with the environment.
#[derive(Clone, Debug, PartialEq)]
pub enum Message {
    Init {
        sid: SessionId,
    },
    Move {
        sid: SessionId,
        point: Point,
    },
    GetCoords {
        sid: SessionId,
    },
    Coords {
        sid: SessionId,
        trail: Vec<Point>,
        sigma: Vec<u8>,
    },
    WitPk {
        sid: SessionId,
        pk: Vec<u8>,
    },
    Prove {
        sid: SessionId,
        ad: AuthorityData,
    },
    Verify {
        sid: SessionId,
        ad: AuthorityData,
    },
    Sig {
        sid: SessionId,
        h: FieldElement,
        sigma: Vec<u8>,
    },
    /// Prover's submission to the ZK functionality: statement `(ad, h)` and
    /// witness `trail` (plus any non-honest witness choices).
    ProveWitness {
        sid: SessionId,
        ad: AuthorityData,
        h: FieldElement,
        trail: Vec<Point>,
        overrides: WitnessOverrides,
    },
    /// Verifier's query to the ZK functionality.
    ProveQuery {
        sid: SessionId,
        ad: AuthorityData,
        h: FieldElement,
    },
    /// Statement proven; carries the circuit's shared input values.
    Proven {
        sid: SessionId,
        shared: Vec<FieldElement>,
    },
    Output {
        sid: SessionId,
        outcome: Outcome,
    },
    /// What a corrupted machine hands to the adversary.
    Leak {
        sid: SessionId,
        ad: Option<AuthorityData>,
        h: Option<FieldElement>,
        trail: Option<Vec<Point>>,
        sigma: Option<Vec<u8>>,
    },
}

impl Message {
    pub fn sid(&self) -> &SessionId {
        match self {
            Message::Init { sid }
            | Message::Move { sid, .. }
            | Message::GetCoords { sid }
            | Message::Coords { sid, .. }
            | Message::WitPk { sid, .. }
            | Message::Prove { sid, .. }
            | Message::Verify { sid, .. }
            | Message::Sig { sid, .. }
            | Message::ProveWitness { sid, .. }
            | Message::ProveQuery { sid, .. }
            | Message::Proven { sid, .. }
            | Message::Output { sid, .. }
            | Message::Leak { sid, .. } => sid,
        }
    }

    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Init { .. } => MessageKind::Init,
            Message::Move { .. } => MessageKind::Move,
            Message::GetCoords { .. } => MessageKind::GetCoords,
            Message::Coords { .. } => MessageKind::Coords,
            Message::WitPk { .. } => MessageKind::WitPk,
            Message::Prove { .. } => MessageKind::Prove,
            Message::Verify { .. } => MessageKind::Verify,
            Message::Sig { .. } => MessageKind::Sig,
            Message::ProveWitness { .. } => MessageKind::ProveWitness,
            Message::ProveQuery { .. } => MessageKind::ProveQuery,
            Message::Proven { .. } => MessageKind::Proven,
            Message::Output { .. } => MessageKind::Output,
            Message::Leak { .. } => MessageKind::Leak,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Init,
    Move,
    GetCoords,
    Coords,
    WitPk,
    Prove,
    Verify,
    Sig,
    ProveWitness,
    ProveQuery,
    Proven,
    Output,
    Leak,
}

/// A message in flight.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub from: Party,
    pub to: Party,
    pub msg: Message,
}

impl Envelope {
    pub fn new(from: Party, to: Party, msg: Message) -> Self {
        Self { from, to, msg }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("{party:?} received {kind:?} out of order: {reason}")]
    ProtocolOrderViolation { party: Party, kind: MessageKind, reason: &'static str },
    #[error("{party:?} cannot handle {kind:?}")]
    UnexpectedMessage { party: Party, kind: MessageKind },
    #[error("prover and verifier cannot both be corrupted")]
    InvalidScenario,
    #[error("session id mismatch: expected {expected}, got {got}")]
    SessionMismatch { expected: SessionId, got: SessionId },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}
