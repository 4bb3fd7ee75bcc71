//! Pluggable signatures for the Witness device.
//!
//! The default [`Schnorr`] scheme works in the order-`q` subgroup of
//! `Z_p^*` for a fixed 2048-bit prime `p = 2kq + 1` with 256-bit `q`.
//!
//! * keys: `x = 1 + (H512("zkpol-schnorr/keygen" || seed) mod (q - 1))`,
//!   `y = g^x mod p`; `sk` is `x` as 32 big-endian bytes, `pk` is `y` as 256.
//! * sign: `k = 1 + (H512("zkpol-schnorr/nonce" || sk || msg) mod (q - 1))`,
//!   `r = g^k`, `e = H256("zkpol-schnorr/challenge" || r || y || msg) mod q`,
//!   `s = k + x*e mod q`; the signature is `e || s`, 32 bytes each.
//! * verify: `y` must lie in `[2, p)` with `y^q = 1`, `e, s < q`, and
//!   `e == H256(.. || g^s * y^(q-e) || y || msg) mod q`.
//!
//! `H256` is SHA-256 and `H512` is SHA-512; group elements are hashed as
//! 256-byte big-endian strings.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256, Sha512};
use std::sync::OnceLock;

/// Three-operation signature interface over byte strings.
pub trait SignatureScheme: Send + Sync {
    fn name(&self) -> &'static str;

    /// Deterministic key pair `(pk, sk)` from a seed.
    fn keygen(&self, seed: &[u8]) -> (Vec<u8>, Vec<u8>);

    fn sign(&self, sk: &[u8], msg: &[u8]) -> Vec<u8>;

    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool;
}

const P_HEX: &str = "800000000000000000000011320f4927a569f4f9c39b385c42253a2c06ba66f5177e2e498d5c9e08d3abca2124ae43fae85d037efba57cbac15fe494a5f40ab2e628927918a4b650f0f94bc757f5f005cd7cdbbdfe38a6c4b4049a18742595e99cfce4da82c411a88ca4ed6334f2db2c30cfc199c336ce32b28d94b9248fecf4a5f0a44be7a7031b4ca85e0fada418dd539398689696fafdf6701c31fa7ef54d1cb4324c6de59dbc0cd6bfc3816488df6d23d3d626712b288948354c0bb1e6cb0ede1ab227bbeb7961832be5e80f0b9b3c824b2b514e493cfc6def146cd3816735a999d388923b3679d30c3af39aa4e8694da4e635b397494967aceac71ec0ed";
const Q_HEX: &str = "9abfd125c9d7b72d39204ba62eca32211f556e2ca8a40af5e73245c2bf65e8c9";
const G_HEX: &str = "10b8c324ad5a4d18e57b6e534f41b65679ca78dd1794b65cefdd53602e4b8754147f998ddd0246b32e2a0413d5e5093fad419f843d0de959f6311c1536792714b9e81c5d3f2c1e7907ea63d325282217a191a58d097bd642e601b8d54df2deb4077d8300e1e0ba3652df18a4ebe736492140958d433706300f9d4e538b88f99d17034ca3c0e966b252776342a65aa3a536bfeb7859c306856da96b39208371d1434eb96e1739efd81312ac8e333528a5bd0449e951190f63a01bd073622778014ca4a5abe87168720318f163ee224ea55196c5d298839a71a1ae1056d31a11c7ddc824b63c2c017ad9cb99e63ad25c4a70113adbf0a37e3ca483a44c1d8dcb94";

const P_BYTES: usize = 256;
const Q_BYTES: usize = 32;

/// A Schnorr group: prime `p`, prime `q | p - 1`, generator `g` of order `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchnorrGroup {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
}

impl SchnorrGroup {
    /// The fixed 2048-bit group. `q` is the first prime above a SHA-256
    /// expansion of `"zkpol schnorr group q"` with the top bit set, and
    /// `p = 2kq + 1` the first prime of that form at or above a SHA-256
    /// expansion of `"zkpol schnorr group p"`; `g = 2^((p-1)/q)`.
    pub fn default_2048() -> &'static SchnorrGroup {
        static G: OnceLock<SchnorrGroup> = OnceLock::new();
        G.get_or_init(|| SchnorrGroup { p: parse_hex(P_HEX), q: parse_hex(Q_HEX), g: parse_hex(G_HEX) })
    }

    /// Membership in the order-`q` subgroup, excluding 1.
    pub fn is_subgroup_element(&self, y: &BigUint) -> bool {
        y > &BigUint::one() && y < &self.p && y.modpow(&self.q, &self.p).is_one()
    }
}

fn parse_hex(s: &str) -> BigUint {
    BigUint::parse_bytes(s.as_bytes(), 16).expect("constant is valid hex")
}

fn to_fixed(n: &BigUint, len: usize) -> Vec<u8> {
    let bytes = n.to_bytes_be();
    let mut out = vec![0u8; len.saturating_sub(bytes.len())];
    out.extend_from_slice(&bytes);
    out
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Schnorr;

impl Schnorr {
    fn group(&self) -> &'static SchnorrGroup {
        SchnorrGroup::default_2048()
    }

    /// `1 + (H512(tag || parts..) mod (q - 1))`.
    fn scalar(&self, tag: &[u8], parts: &[&[u8]]) -> BigUint {
        let mut h = Sha512::new();
        h.update(tag);
        for p in parts {
            h.update(p);
        }
        let q1 = &self.group().q - 1u32;
        BigUint::from_bytes_be(&h.finalize()) % q1 + 1u32
    }

    fn challenge(&self, r: &BigUint, y: &BigUint, msg: &[u8]) -> BigUint {
        let mut h = Sha256::new();
        h.update(b"zkpol-schnorr/challenge");
        h.update(to_fixed(r, P_BYTES));
        h.update(to_fixed(y, P_BYTES));
        h.update(msg);
        BigUint::from_bytes_be(&h.finalize()) % &self.group().q
    }
}

impl SignatureScheme for Schnorr {
    fn name(&self) -> &'static str {
        "schnorr-2048"
    }

    fn keygen(&self, seed: &[u8]) -> (Vec<u8>, Vec<u8>) {
        let grp = self.group();
        let x = self.scalar(b"zkpol-schnorr/keygen", &[seed]);
        let y = grp.g.modpow(&x, &grp.p);
        (to_fixed(&y, P_BYTES), to_fixed(&x, Q_BYTES))
    }

    fn sign(&self, sk: &[u8], msg: &[u8]) -> Vec<u8> {
        let grp = self.group();
        let x = BigUint::from_bytes_be(sk) % &grp.q;
        let y = grp.g.modpow(&x, &grp.p);
        let k = self.scalar(b"zkpol-schnorr/nonce", &[sk, msg]);
        let r = grp.g.modpow(&k, &grp.p);
        let e = self.challenge(&r, &y, msg);
        let s = (k + x * &e) % &grp.q;
        let mut out = to_fixed(&e, Q_BYTES);
        out.extend(to_fixed(&s, Q_BYTES));
        out
    }

    fn verify(&self, pk: &[u8], msg: &[u8], sig: &[u8]) -> bool {
        let grp = self.group();
        if pk.len() != P_BYTES || sig.len() != 2 * Q_BYTES {
            return false;
        }
        let y = BigUint::from_bytes_be(pk);
        if !grp.is_subgroup_element(&y) {
            return false;
        }
        let e = BigUint::from_bytes_be(&sig[..Q_BYTES]);
        let s = BigUint::from_bytes_be(&sig[Q_BYTES..]);
        if e >= grp.q || s >= grp.q {
            return false;
        }
        let neg_e = if e.is_zero() { BigUint::zero() } else { &grp.q - &e };
        let r = grp.g.modpow(&s, &grp.p) * y.modpow(&neg_e, &grp.p) % &grp.p;
        self.challenge(&r, &y, msg) == e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn miller_rabin(n: &BigUint, rounds: usize) -> bool {
        let one = BigUint::one();
        let two = &one + &one;
        if n < &two {
            return false;
        }
        for sp in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            if n == &BigUint::from(sp) {
                return true;
            }
            if (n % sp).is_zero() {
                return false;
            }
        }
        let n1 = n - &one;
        let s = n1.trailing_zeros().unwrap();
        let d = &n1 >> s;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        'outer: for _ in 0..rounds {
            let mut buf = vec![0u8; n.to_bytes_be().len() + 8];
            rng.fill_bytes(&mut buf);
            let a = BigUint::from_bytes_be(&buf) % (&n1 - &one) + &two;
            let mut x = a.modpow(&d, n);
            if x == one || x == n1 {
                continue;
            }
            for _ in 1..s {
                x = x.modpow(&two, n);
                if x == n1 {
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    #[test]
    fn group_constants_are_sound() {
        let grp = SchnorrGroup::default_2048();
        assert_eq!(grp.p.bits(), 2048);
        assert_eq!(grp.q.bits(), 256);
        assert!(miller_rabin(&grp.q, 32));
        assert!(miller_rabin(&grp.p, 16));
        assert!(((&grp.p - 1u32) % &grp.q).is_zero());
        assert!(grp.is_subgroup_element(&grp.g));
    }

    #[test]
    fn miller_rabin_rejects_composites() {
        let grp = SchnorrGroup::default_2048();
        assert!(!miller_rabin(&(&grp.q * 3u32), 8));
        assert!(!miller_rabin(&(&grp.p + 2u32), 8));
        assert!(!miller_rabin(&BigUint::from(561u32), 8));
    }

    #[test]
    fn sign_verify_roundtrip() {
        let s = Schnorr;
        let (pk, sk) = s.keygen(b"device-1");
        let sig = s.sign(&sk, b"hello");
        assert_eq!(sig.len(), 64);
        assert!(s.verify(&pk, b"hello", &sig));
        assert!(!s.verify(&pk, b"hellp", &sig));
        assert_eq!(sig, s.sign(&sk, b"hello"));
    }

    #[test]
    fn rejects_tampering() {
        let s = Schnorr;
        let (pk, sk) = s.keygen(b"device-1");
        let (pk2, _) = s.keygen(b"device-2");
        let sig = s.sign(&sk, b"m");
        assert!(!s.verify(&pk2, b"m", &sig));
        for i in [0, 31, 32, 63] {
            let mut bad = sig.clone();
            bad[i] ^= 1;
            assert!(!s.verify(&pk, b"m", &bad));
        }
        assert!(!s.verify(&pk, b"m", &sig[..63]));
        let mut one = vec![0u8; 256];
        one[255] = 1;
        assert!(!s.verify(&one, b"m", &sig));
        let grp = SchnorrGroup::default_2048();
        // p - 1 has order 2, outside the subgroup.
        assert!(!s.verify(&to_fixed(&(&grp.p - 1u32), 256), b"m", &sig));
    }

    #[test]
    fn distinct_seeds_give_distinct_keys() {
        let s = Schnorr;
        assert_ne!(s.keygen(b"a").0, s.keygen(b"b").0);
        assert_eq!(s.keygen(b"a"), s.keygen(b"a"));
    }
}
