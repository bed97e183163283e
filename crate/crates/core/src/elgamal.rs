//! ElGamal over safe-prime groups in the three deployed variants: textbook
//! single-level encryption, the three-level chained construction, and the
//! squared-message encoding used by the final version.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::modmath::{jacobi, mod_inv, sqrt_mod, GroupParams, Nat};
use crate::rng;

/// Which historical version of the scheme is being modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Version {
    /// Three-level ElGamal over small safe primes with full-group generators.
    Original,
    /// Single level, residue-subgroup generator, messages not mapped into it.
    Modified,
    /// Single level, messages squared before encryption.
    Final,
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Version::Original => "original",
            Version::Modified => "modified",
            Version::Final => "final",
        })
    }
}

impl FromStr for Version {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Version::Original),
            "modified" => Ok(Version::Modified),
            "final" => Ok(Version::Final),
            other => Err(Error::param(format!("unknown version {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub sk: Nat,
    pub pk: Nat,
}

impl KeyPair {
    /// Derives the public key for a known secret exponent.
    pub fn from_secret(params: &GroupParams, sk: Nat) -> Result<Self> {
        if sk >= *params.q() {
            return Err(Error::param("secret key must lie in [0, q)"));
        }
        let pk = params.g().modpow(&sk, params.p());
        Ok(KeyPair { sk, pk })
    }
}

/// Samples `sk` uniformly in `[0, q)` and sets `pk = g^sk`.
pub fn keygen<R: Rng + ?Sized>(params: &GroupParams, rng: &mut R) -> KeyPair {
    let sk = rng::below(rng, params.q());
    let pk = params.g().modpow(&sk, params.p());
    KeyPair { sk, pk }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub a: Nat,
    pub b: Nat,
}

impl Ciphertext {
    pub fn new(params: &GroupParams, a: Nat, b: Nat) -> Result<Self> {
        let ct = Ciphertext { a, b };
        ct.check(params)?;
        Ok(ct)
    }

    fn check(&self, params: &GroupParams) -> Result<()> {
        if !params.in_range(&self.a) || !params.in_range(&self.b) {
            return Err(Error::param("ciphertext components must lie in [1, p-1]"));
        }
        Ok(())
    }

    /// Componentwise product; decrypts to the product of the plaintexts.
    pub fn mul(&self, other: &Ciphertext, params: &GroupParams) -> Ciphertext {
        let p = params.p();
        Ciphertext {
            a: (&self.a * &other.a) % p,
            b: (&self.b * &other.b) % p,
        }
    }
}

fn check_pk(params: &GroupParams, pk: &Nat) -> Result<()> {
    if !params.in_range(pk) {
        return Err(Error::param("public key must lie in [1, p-1]"));
    }
    Ok(())
}

/// Encrypts `m` in `[1, p-1]` with fresh randomness `r` uniform in `[0, q)`.
pub fn encrypt<R: Rng + ?Sized>(
    params: &GroupParams,
    pk: &Nat,
    m: &Nat,
    rng: &mut R,
) -> Result<Ciphertext> {
    let r = rng::below(rng, params.q());
    encrypt_with_nonce(params, pk, m, &r)
}

/// Deterministic core of [`encrypt`]: `(g^r, pk^r * m)`.
pub fn encrypt_with_nonce(params: &GroupParams, pk: &Nat, m: &Nat, r: &Nat) -> Result<Ciphertext> {
    if !params.in_range(m) {
        return Err(Error::param(format!("message must lie in [1, p-1], got {m}")));
    }
    check_pk(params, pk)?;
    let p = params.p();
    let a = params.g().modpow(r, p);
    let b = (pk.modpow(r, p) * m) % p;
    Ok(Ciphertext { a, b })
}

/// `b * a^(-sk) mod p`.
pub fn decrypt(params: &GroupParams, sk: &Nat, ct: &Ciphertext) -> Result<Nat> {
    ct.check(params)?;
    let p = params.p();
    let shared = ct.a.modpow(sk, p);
    let inv = mod_inv(&shared, p)?;
    Ok((&ct.b * inv) % p)
}

/// Three chained groups with strictly increasing moduli.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiParams {
    levels: [GroupParams; 3],
}

impl MultiParams {
    pub fn new(levels: [GroupParams; 3]) -> Result<Self> {
        if !(levels[0].p() < levels[1].p() && levels[1].p() < levels[2].p()) {
            return Err(Error::param("multilevel moduli must satisfy p1 < p2 < p3"));
        }
        Ok(MultiParams { levels })
    }

    pub fn levels(&self) -> &[GroupParams; 3] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &GroupParams {
        &self.levels[i]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiKeySet {
    pub keys: [KeyPair; 3],
}

impl MultiKeySet {
    pub fn generate<R: Rng + ?Sized>(mp: &MultiParams, rng: &mut R) -> Self {
        let [k1, k2, k3] = [0, 1, 2].map(|i| keygen(mp.level(i), rng));
        MultiKeySet { keys: [k1, k2, k3] }
    }

    pub fn public_keys(&self) -> [Nat; 3] {
        [0, 1, 2].map(|i| self.keys[i].pk.clone())
    }

    pub fn secret_keys(&self) -> [Nat; 3] {
        [0, 1, 2].map(|i| self.keys[i].sk.clone())
    }
}

/// The quadruple `(b1, b2, a3, b3)`; the intermediate `a1`, `a2` are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiCiphertext {
    pub b1: Nat,
    pub b2: Nat,
    pub a3: Nat,
    pub b3: Nat,
}

impl MultiCiphertext {
    fn check(&self, mp: &MultiParams) -> Result<()> {
        let ok = mp.level(0).in_range(&self.b1)
            && mp.level(1).in_range(&self.b2)
            && mp.level(2).in_range(&self.a3)
            && mp.level(2).in_range(&self.b3);
        if !ok {
            return Err(Error::param("multilevel ciphertext component out of range"));
        }
        Ok(())
    }
}

pub fn multi_encrypt<R: Rng + ?Sized>(
    mp: &MultiParams,
    pks: &[Nat; 3],
    m: &Nat,
    rng: &mut R,
) -> Result<MultiCiphertext> {
    let nonces = [0, 1, 2].map(|i| rng::below(rng, mp.level(i).q()));
    multi_encrypt_with_nonces(mp, pks, m, &nonces)
}

/// Deterministic core of [`multi_encrypt`]. Each level encrypts the previous
/// level's `a` component, lifted as an integer into the next field.
pub fn multi_encrypt_with_nonces(
    mp: &MultiParams,
    pks: &[Nat; 3],
    m: &Nat,
    nonces: &[Nat; 3],
) -> Result<MultiCiphertext> {
    if !mp.level(0).in_range(m) {
        return Err(Error::param(format!("message must lie in [1, p1-1], got {m}")));
    }
    let c1 = encrypt_with_nonce(mp.level(0), &pks[0], m, &nonces[0])?;
    let c2 = encrypt_with_nonce(mp.level(1), &pks[1], &c1.a, &nonces[1])?;
    let c3 = encrypt_with_nonce(mp.level(2), &pks[2], &c2.a, &nonces[2])?;
    Ok(MultiCiphertext {
        b1: c1.b,
        b2: c2.b,
        a3: c3.a,
        b3: c3.b,
    })
}

pub fn multi_decrypt(mp: &MultiParams, sks: &[Nat; 3], mct: &MultiCiphertext) -> Result<Nat> {
    mct.check(mp)?;
    let a2 = decrypt(
        mp.level(2),
        &sks[2],
        &Ciphertext {
            a: mct.a3.clone(),
            b: mct.b3.clone(),
        },
    )?;
    if !mp.level(1).in_range(&a2) {
        return Err(Error::Corrupted(format!(
            "level-3 plaintext {a2} does not fit the level-2 field"
        )));
    }
    let a1 = decrypt(
        mp.level(1),
        &sks[1],
        &Ciphertext {
            a: a2,
            b: mct.b2.clone(),
        },
    )?;
    if !mp.level(0).in_range(&a1) {
        return Err(Error::Corrupted(format!(
            "level-2 plaintext {a1} does not fit the level-1 field"
        )));
    }
    decrypt(
        mp.level(0),
        &sks[0],
        &Ciphertext {
            a: a1,
            b: mct.b1.clone(),
        },
    )
}

/// `m^2 mod p` for `m` in `[1, (p-1)/2]`.
pub fn encode_qr(m: &Nat, p: &Nat) -> Result<Nat> {
    let half = (p - 1u8) >> 1;
    if m.is_zero() || *m > half {
        return Err(Error::param(format!("message must lie in [1, (p-1)/2], got {m}")));
    }
    Ok((m * m) % p)
}

/// Inverse of [`encode_qr`]: the square root in `[1, (p-1)/2]`.
pub fn decode_qr(c: &Nat, p: &Nat) -> Result<Nat> {
    if jacobi(c, p)? != 1 {
        return Err(Error::NonResidue(c.to_string()));
    }
    let r = sqrt_mod(c, p)?;
    let other = p - &r;
    Ok(if other < r { other } else { r })
}
