//! Visibility-tagged arithmetic circuits and a cleartext satisfiability check.
//!
//! A [`ConstraintSystem`] is an append-only gate list. Every wire carries a
//! [`Domain`] (who may learn its value) and a [`Stage`]: circuit wires are
//! managed by the proof system, local values exist only on one party's side
//! and may enter the circuit solely through [`ConstraintSystem::wire_local`]
//! or [`ConstraintSystem::wire_input`].
//!
//! Values are propagated eagerly while gates are appended, which lets gadgets
//! derive prover hints (bit decompositions, square roots) from earlier wires.
//! [`ConstraintSystem::evaluate_and_check`] discards those and recomputes
//! every wire from the input witnesses before checking assertions, so a
//! tampered input is always observed downstream.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement};

/// Visibility of a value. Ordered by secrecy: `Public < Shared < ProverOnly`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Public,
    Shared,
    ProverOnly,
}

impl Domain {
    /// Secrecy join: the result of an operation is as secret as its most secret input.
    #[inline]
    pub fn join(self, other: Domain) -> Domain {
        self.max(other)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Local,
    Circuit,
}

/// Handle to a value. For circuit-stage wires `id` indexes the gate list;
/// for local-stage values it indexes the local table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Wire {
    id: usize,
    domain: Domain,
    stage: Stage,
}

impl Wire {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    Input {
        domain: Domain,
    },
    Const(FieldElement),
    Add(usize, usize),
    Mul(usize, usize),
    /// `constant + sum(coeff * wire)`.
    AffineCombo {
        terms: Vec<(FieldElement, usize)>,
        constant: FieldElement,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("public constants do not need an input wire; use a constant")]
    PublicNeedsNoWire,
    #[error("wire {0} is a local value and cannot be used as a gate operand")]
    StageViolation(usize),
    #[error("wire {0} has no witness value")]
    IncompleteWitness(usize),
    #[error("wire {0} does not belong to this constraint system")]
    UnknownWire(usize),
    #[error("wire {0} is not an input wire")]
    NotAnInput(usize),
}

/// Structural cost counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counters {
    pub n_mul: usize,
    pub n_add: usize,
    pub n_assert: usize,
    pub n_prover_inputs: usize,
    pub n_shared_inputs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatisfactionReport {
    pub satisfied: bool,
    pub first_failed_assertion: Option<usize>,
    #[serde(flatten)]
    pub counters: Counters,
}

/// Which party is reading a witness value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reader {
    Prover,
    Verifier,
    /// The proof-system stand-in itself.
    Backend,
}

/// Counts reads of prover-only witness values made from Verifier context.
#[derive(Clone, Debug, Default)]
pub struct AccessAudit(Arc<AtomicUsize>);

impl AccessAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn violations(&self) -> usize {
        self.0.load(Ordering::SeqCst)
    }

    fn record(&self) {
        self.0.fetch_add(1, Ordering::SeqCst);
    }
}

#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    field: Field,
    gates: Vec<Gate>,
    domains: Vec<Domain>,
    values: Vec<Option<FieldElement>>,
    assertions: Vec<usize>,
    locals: Vec<(FieldElement, Domain)>,
    consts: HashMap<FieldElement, usize>,
    counters: Counters,
    audit: Option<AccessAudit>,
}

impl ConstraintSystem {
    pub fn new(field: Field) -> Self {
        Self {
            field,
            gates: Vec::new(),
            domains: Vec::new(),
            values: Vec::new(),
            assertions: Vec::new(),
            locals: Vec::new(),
            consts: HashMap::new(),
            counters: Counters::default(),
            audit: None,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn num_wires(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn assertions(&self) -> &[usize] {
        &self.assertions
    }

    /// Routes every subsequent [`Reader::Verifier`] read through `audit`.
    pub fn attach_audit(&mut self, audit: AccessAudit) {
        self.audit = Some(audit);
    }

    /// Input wires of the given domain, in creation order.
    pub fn inputs(&self, domain: Domain) -> Vec<Wire> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(id, g)| match g {
                Gate::Input { domain: d } if *d == domain => Some(Wire { id, domain, stage: Stage::Circuit }),
                _ => None,
            })
            .collect()
    }

    fn push(&mut self, gate: Gate, domain: Domain, value: Option<FieldElement>) -> Wire {
        let id = self.gates.len();
        self.gates.push(gate);
        self.domains.push(domain);
        self.values.push(value);
        Wire { id, domain, stage: Stage::Circuit }
    }

    fn check(&self, w: Wire) -> Result<usize, CircuitError> {
        match w.stage {
            Stage::Local => Err(CircuitError::StageViolation(w.id)),
            Stage::Circuit if w.id < self.gates.len() => Ok(w.id),
            Stage::Circuit => Err(CircuitError::UnknownWire(w.id)),
        }
    }

    /// A prover-local (or verifier-local, for `Shared`) value that is not yet
    /// part of the circuit.
    pub fn local(&mut self, value: FieldElement, domain: Domain) -> Wire {
        let id = self.locals.len();
        self.locals.push((value, domain));
        Wire { id, domain, stage: Stage::Local }
    }

    /// Injects a local value into the circuit.
    pub fn wire_local(&mut self, local: Wire) -> Result<Wire, CircuitError> {
        if local.stage != Stage::Local {
            return Err(CircuitError::NotAnInput(local.id));
        }
        let (value, domain) = *self.locals.get(local.id).ok_or(CircuitError::UnknownWire(local.id))?;
        self.wire_input(value, domain)
    }

    pub fn wire_input(&mut self, value: FieldElement, domain: Domain) -> Result<Wire, CircuitError> {
        self.input(Some(value), domain)
    }

    /// Input wire whose witness may be supplied later with [`Self::set_witness`].
    pub fn input(&mut self, value: Option<FieldElement>, domain: Domain) -> Result<Wire, CircuitError> {
        match domain {
            Domain::Public => return Err(CircuitError::PublicNeedsNoWire),
            Domain::Shared => self.counters.n_shared_inputs += 1,
            Domain::ProverOnly => self.counters.n_prover_inputs += 1,
        }
        Ok(self.push(Gate::Input { domain }, domain, value))
    }

    pub fn set_witness(&mut self, w: Wire, value: FieldElement) -> Result<(), CircuitError> {
        let id = self.check(w)?;
        match self.gates[id] {
            Gate::Input { .. } => {
                self.values[id] = Some(value);
                Ok(())
            }
            _ => Err(CircuitError::NotAnInput(id)),
        }
    }

    /// Public constant wire; repeated constants share one wire.
    pub fn constant(&mut self, c: FieldElement) -> Wire {
        if let Some(&id) = self.consts.get(&c) {
            return Wire { id, domain: Domain::Public, stage: Stage::Circuit };
        }
        let w = self.push(Gate::Const(c), Domain::Public, Some(c));
        self.consts.insert(c, w.id);
        w
    }

    pub fn constant_u64(&mut self, c: u64) -> Wire {
        let c = self.field.from_u64(c);
        self.constant(c)
    }

    pub fn gate(&mut self, kind: GateKind, a: Wire, b: Wire) -> Result<Wire, CircuitError> {
        match kind {
            GateKind::Add => self.add(a, b),
            GateKind::Sub => self.sub(a, b),
            GateKind::Mul => self.mul(a, b),
        }
    }

    pub fn add(&mut self, a: Wire, b: Wire) -> Result<Wire, CircuitError> {
        let (ia, ib) = (self.check(a)?, self.check(b)?);
        let value = match (self.values[ia], self.values[ib]) {
            (Some(x), Some(y)) => Some(self.field.add(x, y)),
            _ => None,
        };
        self.counters.n_add += 1;
        Ok(self.push(Gate::Add(ia, ib), a.domain.join(b.domain), value))
    }

    /// `a - b`, realized as an affine combination with coefficients `(1, -1)`.
    pub fn sub(&mut self, a: Wire, b: Wire) -> Result<Wire, CircuitError> {
        let m1 = self.field.minus_one();
        self.affine(&[(FieldElement::ONE, a), (m1, b)], FieldElement::ZERO)
    }

    pub fn mul(&mut self, a: Wire, b: Wire) -> Result<Wire, CircuitError> {
        let (ia, ib) = (self.check(a)?, self.check(b)?);
        let value = match (self.values[ia], self.values[ib]) {
            (Some(x), Some(y)) => Some(self.field.mul(x, y)),
            _ => None,
        };
        self.counters.n_mul += 1;
        Ok(self.push(Gate::Mul(ia, ib), a.domain.join(b.domain), value))
    }

    /// `constant + sum(coeff * wire)`; counts as one addition per term beyond the first.
    pub fn affine(&mut self, terms: &[(FieldElement, Wire)], constant: FieldElement) -> Result<Wire, CircuitError> {
        let mut domain = Domain::Public;
        let mut resolved = Vec::with_capacity(terms.len());
        let mut value = Some(constant);
        for &(c, w) in terms {
            let id = self.check(w)?;
            domain = domain.join(w.domain);
            resolved.push((c, id));
            value = match (value, self.values[id]) {
                (Some(acc), Some(v)) => Some(self.field.add(acc, self.field.mul(c, v))),
                _ => None,
            };
        }
        let n_terms = terms.len() + usize::from(!constant.is_zero());
        self.counters.n_add += n_terms.saturating_sub(1);
        Ok(self.push(Gate::AffineCombo { terms: resolved, constant }, domain, value))
    }

    /// Sum of wires.
    pub fn sum(&mut self, wires: &[Wire]) -> Result<Wire, CircuitError> {
        let terms: Vec<_> = wires.iter().map(|&w| (FieldElement::ONE, w)).collect();
        self.affine(&terms, FieldElement::ZERO)
    }

    pub fn scale(&mut self, a: Wire, c: FieldElement) -> Result<Wire, CircuitError> {
        self.affine(&[(c, a)], FieldElement::ZERO)
    }

    pub fn add_const(&mut self, a: Wire, c: FieldElement) -> Result<Wire, CircuitError> {
        self.affine(&[(FieldElement::ONE, a)], c)
    }

    /// Records the assertion `w = 0`.
    pub fn assert_zero(&mut self, w: Wire) -> Result<(), CircuitError> {
        let id = self.check(w)?;
        self.assertions.push(id);
        self.counters.n_assert += 1;
        Ok(())
    }

    /// Records the assertion `a - b = 0`.
    pub fn assert_eq(&mut self, a: Wire, b: Wire) -> Result<(), CircuitError> {
        let d = self.sub(a, b)?;
        self.assert_zero(d)
    }

    /// `b ? x : y` as `y + b(x - y)`: one multiplication. `b` must be
    /// constrained to `{0, 1}` separately.
    pub fn oblivious_choice(&mut self, b: Wire, x: Wire, y: Wire) -> Result<Wire, CircuitError> {
        let diff = self.sub(x, y)?;
        let scaled = self.mul(b, diff)?;
        self.add(y, scaled)
    }

    /// Current value of a circuit wire as seen by the prover while building.
    pub fn hint(&self, w: Wire) -> Option<FieldElement> {
        match w.stage {
            Stage::Circuit => self.values.get(w.id).copied().flatten(),
            Stage::Local => self.locals.get(w.id).map(|l| l.0),
        }
    }

    /// Witness read on behalf of `reader`. Verifier reads of prover-only
    /// wires are recorded by the attached [`AccessAudit`].
    pub fn read(&self, w: Wire, reader: Reader) -> Option<FieldElement> {
        let domain = match w.stage {
            Stage::Circuit => *self.domains.get(w.id)?,
            Stage::Local => self.locals.get(w.id)?.1,
        };
        if reader == Reader::Verifier && domain == Domain::ProverOnly {
            if let Some(audit) = &self.audit {
                audit.record();
            }
        }
        self.hint(w)
    }

    /// Recomputes every wire from the input witnesses, in gate order.
    pub fn evaluate(&mut self) -> Result<(), CircuitError> {
        let f = self.field;
        for id in 0..self.gates.len() {
            let v = match &self.gates[id] {
                Gate::Input { .. } => self.values[id].ok_or(CircuitError::IncompleteWitness(id))?,
                Gate::Const(c) => *c,
                Gate::Add(a, b) => f.add(self.val(*a), self.val(*b)),
                Gate::Mul(a, b) => f.mul(self.val(*a), self.val(*b)),
                Gate::AffineCombo { terms, constant } => {
                    terms.iter().fold(*constant, |acc, &(c, w)| f.add(acc, f.mul(c, self.val(w))))
                }
            };
            self.values[id] = Some(v);
        }
        Ok(())
    }

    #[inline]
    fn val(&self, id: usize) -> FieldElement {
        // Gate operands always precede the gate, so they are already evaluated.
        self.values[id].expect("operand evaluated before use")
    }

    /// Full evaluation followed by an assertion check.
    pub fn evaluate_and_check(&mut self) -> Result<SatisfactionReport, CircuitError> {
        self.evaluate()?;
        let first_failed_assertion = self.assertions.iter().position(|&id| !self.val(id).is_zero());
        Ok(SatisfactionReport {
            satisfied: first_failed_assertion.is_none(),
            first_failed_assertion,
            counters: self.counters,
        })
    }

    /// Verifies that no gate output is less secret than any of its operands.
    /// Returns the first offending gate id.
    pub fn check_domain_monotonicity(&self) -> Result<(), usize> {
        for (id, g) in self.gates.iter().enumerate() {
            let ok = match g {
                Gate::Input { domain } => self.domains[id] == *domain,
                Gate::Const(_) => true,
                Gate::Add(a, b) | Gate::Mul(a, b) => {
                    self.domains[id] >= self.domains[*a] && self.domains[id] >= self.domains[*b]
                }
                Gate::AffineCombo { terms, .. } => terms.iter().all(|&(_, w)| self.domains[id] >= self.domains[w]),
            };
            if !ok {
                return Err(id);
            }
        }
        Ok(())
    }
}

/// Free-function form of [`ConstraintSystem::evaluate_and_check`].
pub fn evaluate_and_check(cs: &mut ConstraintSystem) -> Result<SatisfactionReport, CircuitError> {
    cs.evaluate_and_check()
}
