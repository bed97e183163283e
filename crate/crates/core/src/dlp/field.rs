use std::hash::{BuildHasherDefault, Hasher};

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::modmath::Nat;

/// Word-sized prime field used by the generic solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Zp {
    pub p: u64,
}

impl Zp {
    pub fn new(p: &Nat) -> Result<Self> {
        match p.to_u64() {
            Some(p) if (2..(1 << 63)).contains(&p) => Ok(Zp { p }),
            _ => Err(Error::Unsupported(format!(
                "modulus of {} bits exceeds the generic solver ceiling of 63 bits",
                p.bits()
            ))),
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        let mut b = base % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }
}

pub(crate) fn to_u64(x: &Nat, what: &str) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| Error::Unsupported(format!("{what} does not fit in 64 bits")))
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// Inverse modulo a prime `n`.
pub(crate) fn inv_mod_prime(a: u64, n: u64) -> u64 {
    Zp { p: n }.pow(a, n - 2)
}

/// Multiplicative hasher for group elements; the keys are already uniform.
#[derive(Default)]
pub(crate) struct ElementHasher(u64);

impl Hasher for ElementHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x100000001b3);
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = x.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
}

pub(crate) type ElementMap<V> = std::collections::HashMap<u64, V, BuildHasherDefault<ElementHasher>>;
