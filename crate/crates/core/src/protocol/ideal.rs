//! Reference ideal functionality and the simulators that drive it, so that
//! real-system outputs can be compared against ideal ones.

use std::sync::Arc;

use super::session::{Corruption, Scenario, SessionInputs};
use super::{
    relation, signing_message, Envelope, Message, Outcome, Party, ProtocolError, Schnorr, SessionId, SignatureScheme,
    TrailHasher, WitnessOverrides,
};
use crate::field::FieldElement;
use crate::geometry::Point;
use crate::statements::AuthorityData;

/// What the ideal functionality reveals to the adversary on a proof request.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryView {
    pub sid: SessionId,
    pub h: Option<FieldElement>,
    pub ad_p: AuthorityData,
    pub ad_v: AuthorityData,
    /// Only when the Prover is corrupted.
    pub trail: Option<Vec<Point>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdealOutcome {
    pub prover: Outcome,
    pub verifier: Outcome,
    pub view: AdversaryView,
}

/// The adversary's side of the ideal functionality's interface.
pub trait IdealAdversary {
    fn observe(&mut self, view: &AdversaryView);
    /// Final Prover result given the computed `res_P` (corrupt Prover only).
    fn update_prover(&mut self, res: bool) -> bool;
    /// Final Verifier result given the computed `res_V` (corrupt Verifier only).
    fn update_verifier(&mut self, res: bool) -> bool;
    /// Whether the Verifier's answer is released (corrupt Prover only).
    fn proceed(&mut self) -> bool;
}

pub struct IdealFunctionality {
    hasher: TrailHasher,
    corruption: Corruption,
    sid: Option<SessionId>,
    trail: Vec<Point>,
}

impl IdealFunctionality {
    pub fn new(hasher: TrailHasher) -> Self {
        Self { hasher, corruption: Corruption::None, sid: None, trail: Vec::new() }
    }

    pub fn corrupt(&mut self, c: Corruption) -> Result<(), ProtocolError> {
        match (self.corruption, c) {
            (_, Corruption::None) => Ok(()),
            (Corruption::None, c) => {
                self.corruption = c;
                Ok(())
            }
            (a, b) if a == b => Ok(()),
            _ => Err(ProtocolError::InvalidScenario),
        }
    }

    pub fn init(&mut self, sid: SessionId) {
        self.sid = Some(sid);
        self.trail.clear();
    }

    pub fn move_to(&mut self, p: Point) -> Result<(), ProtocolError> {
        if self.sid.is_none() {
            return Err(ProtocolError::ProtocolOrderViolation {
                party: Party::Witness,
                kind: super::MessageKind::Move,
                reason: "device not initialized",
            });
        }
        self.trail.push(p);
        Ok(())
    }

    pub fn prove_verify(
        &self,
        ad_p: &AuthorityData,
        ad_v: &AuthorityData,
        adv: &mut dyn IdealAdversary,
    ) -> IdealOutcome {
        let view = AdversaryView {
            sid: self.sid.clone().unwrap_or_else(|| SessionId::new("")),
            h: self.hasher.digest(&self.trail).ok(),
            ad_p: ad_p.clone(),
            ad_v: ad_v.clone(),
            trail: (self.corruption == Corruption::Prover).then(|| self.trail.clone()),
        };
        let mut res_p = relation(ad_p, &self.trail);
        let mut res_v = ad_p == ad_v && relation(ad_v, &self.trail);
        adv.observe(&view);
        if self.corruption == Corruption::Prover {
            res_p = adv.update_prover(res_p);
        }
        if self.corruption == Corruption::Verifier {
            res_v = adv.update_verifier(res_v);
        }
        let released = self.corruption != Corruption::Prover || adv.proceed();
        IdealOutcome { prover: Outcome::from_bool(res_p), verifier: Outcome::from_bool(released && res_v), view }
    }
}

/// Simulator composed with a tamper-function adversary: it rebuilds the
/// messages the corrupted machine would send, signs with its own key, runs
/// them through the tamper function and translates the result into
/// `update`/`proceed` decisions.
pub struct Simulator {
    scheme: Arc<dyn SignatureScheme>,
    scenario: Scenario,
    keys: (Vec<u8>, Vec<u8>),
    view: Option<AdversaryView>,
    proceed: bool,
}

impl Simulator {
    pub fn new(scheme: Arc<dyn SignatureScheme>, scenario: Scenario, seed: &[u8]) -> Self {
        let mut s = b"simulator".to_vec();
        s.extend_from_slice(seed);
        let keys = scheme.keygen(&s);
        Self { scheme, scenario, keys, view: None, proceed: true }
    }

    fn tampered(&self, envs: Vec<Envelope>) -> Vec<Envelope> {
        let t = self.scenario.tamper().expect("simulator used with a corruption");
        envs.into_iter().flat_map(|e| t.apply(e)).collect()
    }

    fn first(out: &[Envelope], from: Party, to: Party, kind: super::MessageKind) -> Option<&Envelope> {
        out.iter().find(|e| e.from == from && e.to == to && e.msg.kind() == kind)
    }

    fn output_of(out: &[Envelope], from: Party) -> bool {
        match Self::first(out, from, Party::Environment, super::MessageKind::Output) {
            Some(Envelope { msg: Message::Output { outcome, .. }, .. }) => outcome.is_ok(),
            _ => false,
        }
    }
}

impl IdealAdversary for Simulator {
    fn observe(&mut self, view: &AdversaryView) {
        self.view = Some(view.clone());
    }

    fn update_prover(&mut self, res: bool) -> bool {
        use super::MessageKind as K;
        let view = self.view.clone().expect("observe comes first");
        let sid = view.sid.clone();
        let me = Party::Prover;
        let mut honest = Vec::new();
        if let (Some(h), Some(trail)) = (view.h, view.trail.clone()) {
            let sigma = self.scheme.sign(&self.keys.1, &signing_message(&sid, h));
            honest.push(Envelope::new(me, Party::Verifier, Message::Sig { sid: sid.clone(), h, sigma }));
            honest.push(Envelope::new(
                me,
                Party::Fzk,
                Message::ProveWitness {
                    sid: sid.clone(),
                    ad: view.ad_p.clone(),
                    h,
                    trail,
                    overrides: WitnessOverrides::default(),
                },
            ));
        }
        honest.push(Envelope::new(me, Party::Environment, Message::Output { sid, outcome: Outcome::from_bool(res) }));
        let out = self.tampered(honest.clone());
        let unchanged = |to, kind| {
            let h = Self::first(&honest, me, to, kind);
            h.is_some() && Self::first(&out, me, to, kind) == h
        };
        self.proceed = unchanged(Party::Verifier, K::Sig) && unchanged(Party::Fzk, K::ProveWitness);
        Self::output_of(&out, me)
    }

    fn update_verifier(&mut self, mut res: bool) -> bool {
        use super::MessageKind as K;
        let view = self.view.clone().expect("observe comes first");
        let sid = view.sid.clone();
        let me = Party::Verifier;
        if res {
            if let Some(h) = view.h {
                let query =
                    Envelope::new(me, Party::Fzk, Message::ProveQuery { sid: sid.clone(), ad: view.ad_v.clone(), h });
                let out = self.tampered(vec![query.clone()]);
                if Self::first(&out, me, Party::Fzk, K::ProveQuery) != Some(&query) {
                    res = false;
                }
            }
        }
        let out = self.tampered(vec![Envelope::new(
            me,
            Party::Environment,
            Message::Output { sid, outcome: Outcome::from_bool(res) },
        )]);
        Self::output_of(&out, me)
    }

    fn proceed(&mut self) -> bool {
        self.proceed
    }
}

/// Outputs of the ideal functionality, with the scenario's adversary
/// simulated, on the same inputs as [`super::run_session`].
pub fn ideal_outputs(scenario: &Scenario, inputs: &SessionInputs) -> Result<IdealOutcome, ProtocolError> {
    ideal_outputs_with(Arc::new(Schnorr), scenario, inputs)
}

pub fn ideal_outputs_with(
    scheme: Arc<dyn SignatureScheme>,
    scenario: &Scenario,
    inputs: &SessionInputs,
) -> Result<IdealOutcome, ProtocolError> {
    let corruption = scenario.corruption()?;
    let mut ideal = IdealFunctionality::new(inputs.hasher.clone());
    ideal.corrupt(corruption)?;
    ideal.init(inputs.sid.clone());
    for &p in &inputs.trail {
        ideal.move_to(p)?;
    }
    let mut sim = Simulator::new(scheme, scenario.clone(), &inputs.seed.to_be_bytes());
    Ok(ideal.prove_verify(&inputs.ad_p, &inputs.ad_v, &mut sim))
}
