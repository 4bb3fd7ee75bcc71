//! Poseidon-style permutation and sponge over the statement field.
//!
//! # Parameter derivation
//!
//! Round constants are derived from a seed string. Constant `j` (counting
//! lanes fastest, then rounds) is the first candidate `attempt = 0, 1, ..`
//! accepted from
//!
//! ```text
//! digest = SHA-256( "zkpol/poseidon/rc" || u32_be(len(seed)) || seed
//!                   || u64_be(j) || u32_be(attempt) )
//! c      = u128_be(digest[0..16]) & (2^(bits(p) - 1) - 1)
//! ```
//!
//! rejecting candidates `c >= p` (with the mask this cannot happen for prime
//! `p`, the rule is kept so the procedure is well defined for any modulus).
//! The MDS matrix is the Cauchy matrix `M[i][j] = 1 / (i + t + j)`.
//!
//! Rounds: `r_full / 2` full rounds, `r_partial` partial rounds, `r_full / 2`
//! full rounds. Each round adds `t` constants, applies `x^alpha` to every
//! lane (full) or to lane 0 only (partial), and multiplies by `M`.
//!
//! The defaults (`t = 3`, `alpha = 5`, 8 full and 56 partial rounds) are in
//! the usual range for ~128-bit fields but have not been re-derived from a
//! security analysis. This instance is not compatible with any external
//! Poseidon deployment.
//!
//! # Sponge
//!
//! Lane 0 starts as the message length, the other lanes at zero. The
//! message is absorbed `t - 1` elements at a time into lanes `1..t` by
//! addition (the last chunk zero-padded) with a permutation after each
//! chunk; the digest is lane 0.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{ConstraintSystem, Wire};
use crate::field::{Field, FieldElement};
use crate::localcalc;

use super::GadgetError;

pub const DEFAULT_SEED: &str = "zkpol-poseidon-v1";
const RC_DOMAIN: &[u8] = b"zkpol/poseidon/rc";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoseidonParams {
    field: Field,
    t: usize,
    alpha: u64,
    r_full: usize,
    r_partial: usize,
    round_constants: Vec<FieldElement>,
    mds: Vec<Vec<FieldElement>>,
    seed: String,
}

impl Default for PoseidonParams {
    fn default() -> Self {
        Self::default_for(Field::default())
    }
}

impl PoseidonParams {
    /// Default instance for `field`.
    pub fn default_for(field: Field) -> Self {
        Self::derive(field, DEFAULT_SEED, 3, 5, 8, 56).expect("default parameters are valid for any supported field")
    }

    /// Derives constants and MDS matrix from `seed`.
    pub fn derive(
        field: Field,
        seed: &str,
        t: usize,
        alpha: u64,
        r_full: usize,
        r_partial: usize,
    ) -> Result<Self, GadgetError> {
        let n = t * (r_full + r_partial);
        let round_constants = derive_round_constants(field, seed.as_bytes(), n);
        let mds = cauchy_mds(field, t)?;
        Self::with_constants(field, seed, t, alpha, r_full, r_partial, round_constants, mds)
    }

    /// Explicit constants, validated.
    #[allow(clippy::too_many_arguments)]
    pub fn with_constants(
        field: Field,
        seed: &str,
        t: usize,
        alpha: u64,
        r_full: usize,
        r_partial: usize,
        round_constants: Vec<FieldElement>,
        mds: Vec<Vec<FieldElement>>,
    ) -> Result<Self, GadgetError> {
        let bad = |m: String| Err(GadgetError::Poseidon(m));
        if t < 2 {
            return bad(format!("state width {t} < 2"));
        }
        if alpha < 3 || (alpha as u128).gcd(&(field.modulus() - 1)) != 1 {
            return bad(format!("x^{alpha} is not a permutation of the field"));
        }
        if r_full == 0 || !r_full.is_multiple_of(2) {
            return bad(format!("full rounds must be positive and even, got {r_full}"));
        }
        if round_constants.len() != t * (r_full + r_partial) {
            return bad(format!(
                "expected {} round constants, got {}",
                t * (r_full + r_partial),
                round_constants.len()
            ));
        }
        if mds.len() != t || mds.iter().any(|row| row.len() != t) {
            return bad(format!("MDS matrix must be {t}x{t}"));
        }
        let all = round_constants.iter().chain(mds.iter().flatten());
        if let Some(c) = all.into_iter().find(|c| c.value() >= field.modulus()) {
            return bad(format!("constant {c} not reduced"));
        }
        if !is_invertible(field, &mds) {
            return bad("MDS matrix is singular".into());
        }
        Ok(Self { field, t, alpha, r_full, r_partial, round_constants, mds, seed: seed.to_owned() })
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn rate(&self) -> usize {
        self.t - 1
    }
    pub fn alpha(&self) -> u64 {
        self.alpha
    }
    pub fn r_full(&self) -> usize {
        self.r_full
    }
    pub fn r_partial(&self) -> usize {
        self.r_partial
    }
    pub fn rounds(&self) -> usize {
        self.r_full + self.r_partial
    }
    pub fn round_constants(&self) -> &[FieldElement] {
        &self.round_constants
    }
    pub fn mds(&self) -> &[Vec<FieldElement>] {
        &self.mds
    }
    pub fn seed(&self) -> &str {
        &self.seed
    }

    /// Whether round `r` applies the S-box to every lane.
    pub fn is_full_round(&self, r: usize) -> bool {
        let half = self.r_full / 2;
        r < half || r >= half + self.r_partial
    }

    /// Plaintext permutation (see [`localcalc::poseidon_permute`]).
    pub fn permute(&self, state: &mut [FieldElement]) -> Result<(), GadgetError> {
        localcalc::poseidon_permute(self, state)
    }

    /// Plaintext sponge digest (see [`localcalc::poseidon_hash`]).
    pub fn hash(&self, msg: &[FieldElement]) -> Result<FieldElement, GadgetError> {
        localcalc::poseidon_hash(self, msg)
    }

    pub fn to_doc(&self, include_constants: bool) -> PoseidonDoc {
        let dec = |v: &FieldElement| v.to_string();
        PoseidonDoc {
            seed: self.seed.clone(),
            t: self.t,
            alpha: self.alpha,
            r_full: self.r_full,
            r_partial: self.r_partial,
            round_constants: include_constants.then(|| self.round_constants.iter().map(dec).collect()),
            mds: include_constants.then(|| self.mds.iter().map(|row| row.iter().map(dec).collect()).collect()),
        }
    }

    /// Explicit constants in the document take precedence over derivation.
    pub fn from_doc(field: Field, doc: &PoseidonDoc) -> Result<Self, GadgetError> {
        let derived = || Self::derive(field, &doc.seed, doc.t, doc.alpha, doc.r_full, doc.r_partial);
        if doc.round_constants.is_none() && doc.mds.is_none() {
            return derived();
        }
        let parse = |s: &String| {
            s.parse::<u128>()
                .map_err(|e| GadgetError::Poseidon(format!("bad constant {s:?}: {e}")))
                .and_then(|v| Ok(field.checked_elem(v)?))
        };
        let rc = match &doc.round_constants {
            Some(v) => v.iter().map(parse).collect::<Result<Vec<_>, _>>()?,
            None => derived()?.round_constants,
        };
        let mds = match &doc.mds {
            Some(m) => m
                .iter()
                .map(|row| row.iter().map(parse).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?,
            None => cauchy_mds(field, doc.t)?,
        };
        Self::with_constants(field, &doc.seed, doc.t, doc.alpha, doc.r_full, doc.r_partial, rc, mds)
    }
}

/// Serialized form; constants are decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoseidonDoc {
    pub seed: String,
    pub t: usize,
    pub alpha: u64,
    pub r_full: usize,
    pub r_partial: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_constants: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mds: Option<Vec<Vec<String>>>,
}

impl Default for PoseidonDoc {
    fn default() -> Self {
        PoseidonParams::default().to_doc(false)
    }
}

pub fn derive_round_constants(field: Field, seed: &[u8], n: usize) -> Vec<FieldElement> {
    let mask = (1u128 << (field.bits() - 1)) - 1;
    (0..n as u64)
        .map(|j| {
            (0u32..)
                .find_map(|attempt| {
                    let mut h = Sha256::new();
                    h.update(RC_DOMAIN);
                    h.update((seed.len() as u32).to_be_bytes());
                    h.update(seed);
                    h.update(j.to_be_bytes());
                    h.update(attempt.to_be_bytes());
                    let digest = h.finalize();
                    let mut head = [0u8; 16];
                    head.copy_from_slice(&digest[..16]);
                    let c = u128::from_be_bytes(head) & mask;
                    field.checked_elem(c).ok()
                })
                .expect("some candidate is accepted")
        })
        .collect()
}

/// `M[i][j] = 1 / (i + t + j)`.
pub fn cauchy_mds(field: Field, t: usize) -> Result<Vec<Vec<FieldElement>>, GadgetError> {
    (0..t).map(|i| (0..t).map(|j| Ok(field.inv(field.elem((i + t + j) as u128))?)).collect()).collect()
}

fn is_invertible(field: Field, m: &[Vec<FieldElement>]) -> bool {
    let mut a: Vec<Vec<FieldElement>> = m.to_vec();
    let n = a.len();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return false;
        };
        a.swap(col, piv);
        let inv = field.inv(a[col][col]).expect("pivot is non-zero");
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let factor = field.mul(row[col], inv);
            for (x, &p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = field.sub(*x, field.mul(factor, p));
            }
        }
    }
    true
}

fn sbox(cs: &mut ConstraintSystem, x: Wire, alpha: u64) -> Result<Wire, GadgetError> {
    let mut acc = x;
    for i in (0..63 - alpha.leading_zeros()).rev() {
        acc = cs.mul(acc, acc)?;
        if (alpha >> i) & 1 == 1 {
            acc = cs.mul(acc, x)?;
        }
    }
    Ok(acc)
}

/// In-circuit permutation. Each round's constants are folded into the
/// previous round's linear layer, so a round costs `t` affine gates plus
/// the S-box multiplications.
pub fn poseidon_permute(
    cs: &mut ConstraintSystem,
    state: &[Wire],
    pp: &PoseidonParams,
) -> Result<Vec<Wire>, GadgetError> {
    let t = pp.t;
    if state.len() != t {
        return Err(GadgetError::WrongStateWidth { expected: t, got: state.len() });
    }
    let f = cs.field();
    let mut lanes = state.to_vec();
    let mut pending: Vec<FieldElement> = pp.round_constants[..t].to_vec();
    for r in 0..pp.rounds() {
        let boxed = if pp.is_full_round(r) { t } else { 1 };
        for i in 0..boxed {
            let x = if pending[i].is_zero() { lanes[i] } else { cs.add_const(lanes[i], pending[i])? };
            lanes[i] = sbox(cs, x, pp.alpha)?;
            pending[i] = FieldElement::ZERO;
        }
        let next = pp.round_constants.get((r + 1) * t..(r + 2) * t);
        let mut out = Vec::with_capacity(t);
        for (i, row) in pp.mds.iter().enumerate() {
            let mut constant = next.map_or(FieldElement::ZERO, |c| c[i]);
            for (m, p) in row.iter().zip(&pending) {
                constant = f.add(constant, f.mul(*m, *p));
            }
            let terms: Vec<_> = row.iter().copied().zip(lanes.iter().copied()).collect();
            out.push(cs.affine(&terms, constant)?);
        }
        lanes = out;
        pending.iter_mut().for_each(|p| *p = FieldElement::ZERO);
    }
    Ok(lanes)
}

/// In-circuit sponge digest of a fixed-length message.
pub fn poseidon_hash(cs: &mut ConstraintSystem, msg: &[Wire], pp: &PoseidonParams) -> Result<Wire, GadgetError> {
    if msg.is_empty() {
        return Err(GadgetError::EmptyMessage);
    }
    let f = cs.field();
    let len = f.from_signed(msg.len() as i128)?;
    let mut lanes = vec![cs.constant(len)];
    lanes.extend((1..pp.t).map(|_| cs.constant(FieldElement::ZERO)));
    for chunk in msg.chunks(pp.rate()) {
        for (j, &m) in chunk.iter().enumerate() {
            lanes[1 + j] = cs.add(lanes[1 + j], m)?;
        }
        lanes = poseidon_permute(cs, &lanes, pp)?;
    }
    Ok(lanes[0])
}
