//! Prime-field arithmetic over a runtime modulus `p < 2^127`.
//!
//! Every circuit value lives in this field. The default modulus is the
//! Mersenne prime `2^127 - 1`, which gets a shift-and-add reduction; any
//! other prime goes through a generic (slower) bit-serial reduction.
//!
//! Signed integers are embedded as `n -> n mod p`, so `-5` becomes `p - 5`.
//! [`Field::to_signed`] inverts the embedding on `(-p/2, p/2)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `2^127 - 1`.
pub const DEFAULT_MODULUS: u128 = (1u128 << 127) - 1;

/// Default bit length of any coordinate or radius.
pub const DEFAULT_COORD_BITS: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("inversion of zero")]
    InversionOfZero,
    #[error("integer {0} is outside the signed embedding range (-p/2, p/2)")]
    OutOfRange(i128),
    #[error("modulus {0} is not prime")]
    NotPrime(u128),
    #[error("modulus must be below 2^127")]
    ModulusTooLarge,
    #[error("modulus has {bits} bits but coordinate width {coord_bits} needs at least {needed}")]
    InsufficientHeadroom { bits: u32, coord_bits: u32, needed: u32 },
    #[error("coordinate width {0} is outside the supported range 1..=40")]
    CoordBits(u32),
    #[error("value {0} is not reduced modulo p")]
    NotReduced(u128),
}

/// A residue in `[0, p)`. Carries no modulus; arithmetic goes through [`Field`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(u128);

impl FieldElement {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);

    #[inline]
    pub fn value(self) -> u128 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Big-endian bytes, fixed 16-byte width.
    pub fn to_be_bytes(self) -> [u8; 16] {
        self.0.to_be_bytes()
    }
}

impl From<bool> for FieldElement {
    fn from(b: bool) -> Self {
        Self(b as u128)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arithmetic context for one prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    modulus: u128,
    bits: u32,
}

impl Default for Field {
    fn default() -> Self {
        Self::mersenne127()
    }
}

impl Field {
    pub const fn mersenne127() -> Self {
        Self { modulus: DEFAULT_MODULUS, bits: 127 }
    }

    /// Builds a field, running a Miller-Rabin primality check on `modulus`.
    pub fn new(modulus: u128) -> Result<Self, FieldError> {
        if modulus >= 1u128 << 127 {
            return Err(FieldError::ModulusTooLarge);
        }
        let field = Self::new_unchecked(modulus);
        if !is_probable_prime(modulus) {
            return Err(FieldError::NotPrime(modulus));
        }
        Ok(field)
    }

    fn new_unchecked(modulus: u128) -> Self {
        Self { modulus, bits: 128 - modulus.leading_zeros() }
    }

    #[inline]
    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    /// Bit length of `p`.
    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Byte width of a canonical big-endian encoding of one element.
    pub fn byte_len(&self) -> usize {
        self.bits.div_ceil(8) as usize
    }

    #[inline]
    pub fn elem(&self, v: u128) -> FieldElement {
        FieldElement(if v >= self.modulus { v % self.modulus } else { v })
    }

    /// Accepts `v` only if it is already reduced.
    pub fn checked_elem(&self, v: u128) -> Result<FieldElement, FieldError> {
        if v < self.modulus {
            Ok(FieldElement(v))
        } else {
            Err(FieldError::NotReduced(v))
        }
    }

    #[inline]
    pub fn from_u64(&self, v: u64) -> FieldElement {
        self.elem(v as u128)
    }

    /// `p - 1`, i.e. `-1`.
    #[inline]
    pub fn minus_one(&self) -> FieldElement {
        FieldElement(self.modulus - 1)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        // a, b < p < 2^127, so the sum cannot overflow u128.
        let s = a.0 + b.0;
        FieldElement(if s >= self.modulus { s - self.modulus } else { s })
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 >= b.0 {
            FieldElement(a.0 - b.0)
        } else {
            FieldElement(self.modulus - b.0 + a.0)
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement(self.modulus - a.0)
        }
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (hi, lo) = mul_wide(a.0, b.0);
        if self.modulus == DEFAULT_MODULUS {
            // 2^127 = 1 (mod p): fold the top 127 bits onto the bottom 127.
            let top = (hi << 1) | (lo >> 127);
            let s = top + (lo & DEFAULT_MODULUS);
            let s = (s & DEFAULT_MODULUS) + (s >> 127);
            FieldElement(if s >= DEFAULT_MODULUS { s - DEFAULT_MODULUS } else { s })
        } else {
            FieldElement(reduce_wide(hi, lo, self.modulus))
        }
    }

    #[inline]
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn pow(&self, base: FieldElement, mut exp: u128) -> FieldElement {
        let mut acc = FieldElement(1 % self.modulus);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat (`a^(p-2)`).
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::InversionOfZero);
        }
        Ok(self.pow(a, self.modulus - 2))
    }

    /// Embeds a signed integer with `|n| < p/2`.
    pub fn from_signed(&self, n: i128) -> Result<FieldElement, FieldError> {
        let mag = n.unsigned_abs();
        // p is odd, so |n| < p/2  <=>  |n| <= floor(p/2).
        if mag > self.modulus / 2 {
            return Err(FieldError::OutOfRange(n));
        }
        Ok(if n >= 0 { FieldElement(mag) } else { self.neg(FieldElement(mag)) })
    }

    /// Inverse of [`Field::from_signed`]: values at or above `p/2` read as negative.
    pub fn to_signed(&self, a: FieldElement) -> i128 {
        if a.0 <= self.modulus / 2 {
            a.0 as i128
        } else {
            -((self.modulus - a.0) as i128)
        }
    }

    /// Reads an element as a non-negative integer if it is below `2^bits`.
    pub fn to_bounded_u128(&self, a: FieldElement, bits: u32) -> Option<u128> {
        if bits >= 128 || a.0 < (1u128 << bits) {
            Some(a.0)
        } else {
            None
        }
    }
}

/// 128x128 -> 256-bit product as `(hi, lo)`.
#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a0, a1) = (a & MASK, a >> 64);
    let (b0, b1) = (b & MASK, b >> 64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
    let lo = (p00 & MASK) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// `(hi * 2^128 + lo) mod m` for `m < 2^127`, bit-serial.
fn reduce_wide(hi: u128, lo: u128, m: u128) -> u128 {
    let mut r = hi % m;
    for i in (0..128).rev() {
        // r < m < 2^127, so 2r + 1 fits.
        r = (r << 1) | ((lo >> i) & 1);
        if r >= m {
            r -= m;
        }
    }
    r
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    let (hi, lo) = mul_wide(a, b);
    reduce_wide(hi, lo, m)
}

fn powmod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

const MR_BASES: [u128; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];

/// Miller-Rabin over a fixed base set. Deterministic below 3.3 * 10^24,
/// probabilistic (error < 4^-20 per composite) above.
pub fn is_probable_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Field choice plus the coordinate width `k_c` the statements are sized for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldParams {
    field: Field,
    coord_bits: u32,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self { field: Field::mersenne127(), coord_bits: DEFAULT_COORD_BITS }
    }
}

impl FieldParams {
    pub fn new(modulus: u128, coord_bits: u32) -> Result<Self, FieldError> {
        if !(1..=40).contains(&coord_bits) {
            return Err(FieldError::CoordBits(coord_bits));
        }
        let field = Field::new(modulus)?;
        let needed = OverflowLedger::new(coord_bits).min_modulus_bits();
        if field.bits() < needed {
            return Err(FieldError::InsufficientHeadroom { bits: field.bits(), coord_bits, needed });
        }
        Ok(Self { field, coord_bits })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn modulus(&self) -> u128 {
        self.field.modulus()
    }

    pub fn coord_bits(&self) -> u32 {
        self.coord_bits
    }

    pub fn ledger(&self) -> OverflowLedger {
        OverflowLedger::new(self.coord_bits)
    }
}

/// Bit bounds on every intermediate integer the statements compute, for
/// coordinates and radii in `[0, 2^k_c)`.
///
/// | quantity                                  | bound            |
/// |-------------------------------------------|------------------|
/// | squared distance `dx^2 + dy^2`            | `< 2^(2k_c+1)`   |
/// | segment length `isqrt(...)`               | `< 2^(k_c+1)`    |
/// | doubled triangle area `A`                 | `< 2^(2k_c+3)`   |
/// | barycentric coordinate `s`, `t`, `u`      | `|.| < 2^(2k_c+3)` |
/// | barycentric reconstruction term `u*a1+..` | `< 2^(3k_c+4)`   |
/// | policy products `tot*P_req`, `cc*100`     | `< 2^(2k_c+16)`  |
///
/// The policy row holds for trails of up to `2^(k_c+8)` points. All rows sit below `p/2` whenever `p` has
/// at least [`OverflowLedger::min_modulus_bits`] bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OverflowLedger {
    pub coord_bits: u32,
}

impl OverflowLedger {
    pub fn new(coord_bits: u32) -> Self {
        Self { coord_bits }
    }

    pub fn sq_dist_bits(&self) -> u32 {
        2 * self.coord_bits + 1
    }

    /// Half-width handed to the square-root gadget: `d < 2^(k_c+1)`.
    pub fn sqrt_half_bits(&self) -> u32 {
        self.coord_bits + 1
    }

    pub fn area_bits(&self) -> u32 {
        2 * self.coord_bits + 3
    }

    /// `m` in the shifted non-negativity test for barycentric coordinates.
    pub fn bary_bits(&self) -> u32 {
        2 * self.coord_bits + 3
    }

    pub fn bary_term_bits(&self) -> u32 {
        3 * self.coord_bits + 4
    }

    /// Comparison width for the final policy assertions.
    pub fn policy_bits(&self) -> u32 {
        2 * self.coord_bits + 16
    }

    /// Largest trail length the policy row covers.
    pub fn max_traj(&self) -> usize {
        // tot < n * 2^(k_c+1), times 100 < 2^7: n * 2^(k_c+8) <= 2^(2k_c+16).
        1usize << (self.coord_bits + 8).min(40)
    }

    /// `p > 2^(3k_c+6)`, and every comparison of width `w` needs `w + 2 < bits(p)`.
    pub fn min_modulus_bits(&self) -> u32 {
        (3 * self.coord_bits + 7).max(self.policy_bits() + 3)
    }
}
