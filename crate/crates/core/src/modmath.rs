//! Arbitrary-precision modular arithmetic and safe-prime group parameters.
//!
//! Everything here is a pure function of its inputs. Randomness, where it is
//! needed, is passed in by the caller.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Nat = BigUint;

/// Miller-Rabin rounds used when no explicit count is requested.
pub const DEFAULT_MR_ROUNDS: u32 = 64;

pub const MIN_SAFE_PRIME_BITS: u64 = 5;
pub const MAX_SAFE_PRIME_BITS: u64 = 4096;

const SIEVE_LIMIT: u32 = 1 << 16;

/// Odd primes below 2^16.
fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = SIEVE_LIMIT as usize;
        let mut composite = vec![false; n];
        let mut out = Vec::new();
        for i in 2..n {
            if !composite[i] {
                if i > 2 {
                    out.push(i as u32);
                }
                let mut j = i * i;
                while j < n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

pub fn mod_pow(base: &Nat, exp: &Nat, modulus: &Nat) -> Result<Nat> {
    if *modulus < Nat::from(2u8) {
        return Err(Error::param("modulus must be at least 2"));
    }
    Ok(base.modpow(exp, modulus))
}

/// Inverse of `a` modulo `modulus` by the extended Euclidean algorithm.
pub fn mod_inv(a: &Nat, modulus: &Nat) -> Result<Nat> {
    if *modulus < Nat::from(2u8) {
        return Err(Error::param("modulus must be at least 2"));
    }
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let a_int = BigInt::from_biguint(Sign::Plus, a % modulus);
    let egcd = a_int.extended_gcd(&m);
    if !egcd.gcd.is_one() {
        return Err(Error::NotInvertible {
            value: a.to_string(),
            modulus: modulus.to_string(),
        });
    }
    let x = egcd.x.mod_floor(&m);
    Ok(x.to_biguint().expect("mod_floor by a positive modulus is non-negative"))
}

/// Jacobi symbol `(a/n)` for odd `n >= 3`, by the binary reciprocity algorithm.
pub fn jacobi(a: &Nat, n: &Nat) -> Result<i8> {
    if n.is_even() || *n < Nat::from(3u8) {
        return Err(Error::param("jacobi symbol needs an odd modulus >= 3"));
    }
    let mut a = a % n;
    let mut n = n.clone();
    let mut t = 1i8;
    while !a.is_zero() {
        let tz = a.trailing_zeros().expect("a is non-zero");
        if tz > 0 {
            a >>= tz;
            // (2/n) = -1 iff n = 3, 5 (mod 8)
            let n_mod_8 = low_u64(&n) & 7;
            if tz & 1 == 1 && (n_mod_8 == 3 || n_mod_8 == 5) {
                t = -t;
            }
        }
        // reciprocity: flip when both are 3 mod 4
        if low_u64(&a) & 3 == 3 && low_u64(&n) & 3 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= &n;
    }
    Ok(if n.is_one() { t } else { 0 })
}

fn low_u64(n: &Nat) -> u64 {
    n.iter_u64_digits().next().unwrap_or(0)
}

/// Square root modulo a prime `p = 3 (mod 4)`, computed as `a^((p+1)/4)`.
///
/// Returns one of the two roots; the caller picks between `r` and `p - r`.
pub fn sqrt_mod(a: &Nat, p: &Nat) -> Result<Nat> {
    if low_u64(p) & 3 != 3 {
        return Err(Error::Unsupported(format!("{p} is not congruent to 3 mod 4")));
    }
    let a = a % p;
    let exp = (p + 1u8) >> 2;
    let r = a.modpow(&exp, p);
    if a.is_zero() || (&r * &r) % p != a {
        return Err(Error::NonResidue(a.to_string()));
    }
    Ok(r)
}

/// Probabilistic primality test.
///
/// Values below 2^16 are decided exactly by trial division. Larger values go
/// through trial division by the small primes and then `rounds` Miller-Rabin
/// rounds with bases drawn from a generator seeded by a hash of `n`, so the
/// verdict is reproducible.
pub fn is_probable_prime(n: &Nat, rounds: u32) -> bool {
    let rounds = rounds.max(1);
    if let Some(small) = n.to_u64() {
        if small < SIEVE_LIMIT as u64 {
            return is_small_prime(small as u32);
        }
    }
    if n.is_even() {
        return false;
    }
    for &l in small_primes() {
        if (n % l).is_zero() {
            return false;
        }
    }
    let mut hasher = Sha256::new();
    hasher.update(n.to_bytes_be());
    let seed: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha20Rng::from_seed(seed);
    miller_rabin(n, rounds, &mut rng)
}

fn is_small_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Miller-Rabin with random bases in `[2, n-2]`. `n` must be odd and > 3.
fn miller_rabin<R: Rng + ?Sized>(n: &Nat, rounds: u32, rng: &mut R) -> bool {
    let one = Nat::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().expect("n - 1 is non-zero");
    let d = &n_minus_1 >> s;
    let two = Nat::from(2u8);
    'rounds: for round in 0..rounds {
        let base = if round == 0 {
            two.clone()
        } else {
            rng.gen_biguint_range(&two, &n_minus_1)
        };
        let mut x = base.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'rounds;
            }
            if x == one {
                return false;
            }
        }
        return false;
    }
    true
}

/// Order of the generator inside the safe-prime group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorOrder {
    /// Generator of the whole multiplicative group, order `2q`.
    FullGroup,
    /// Generator of the quadratic residues, order `q`.
    QrSubgroup,
}

impl fmt::Display for GeneratorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorOrder::FullGroup => f.write_str("full group (order 2q)"),
            GeneratorOrder::QrSubgroup => f.write_str("quadratic residues (order q)"),
        }
    }
}

/// A safe prime `p = 2q + 1` together with a generator of known order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    p: Nat,
    q: Nat,
    g: Nat,
    order: GeneratorOrder,
}

impl GroupParams {
    /// Validates `p`, `q = (p-1)/2` and the claimed order of `g`.
    pub fn new(p: Nat, g: Nat, order: GeneratorOrder) -> Result<Self> {
        let q = safe_prime_half(&p)?;
        Self::with_verified_prime(p, q, g, order)
    }

    /// Builds parameters over a safe prime, selecting the generator: the
    /// smallest quadratic non-residue for the full group, or its square for
    /// the residue subgroup.
    pub fn from_safe_prime(p: Nat, order: GeneratorOrder) -> Result<Self> {
        let q = safe_prime_half(&p)?;
        let g = select_generator(&p, order);
        Self::with_verified_prime(p, q, g, order)
    }

    fn with_verified_prime(p: Nat, q: Nat, g: Nat, order: GeneratorOrder) -> Result<Self> {
        if g <= Nat::one() || g >= p {
            return Err(Error::param("generator must satisfy 1 < g < p"));
        }
        let gq = g.modpow(&q, &p);
        let ok = match order {
            GeneratorOrder::QrSubgroup => gq.is_one(),
            GeneratorOrder::FullGroup => gq == &p - 1u8,
        };
        if !ok {
            return Err(Error::param(format!("generator {g} does not have order {order}")));
        }
        Ok(GroupParams { p, q, g, order })
    }

    pub fn p(&self) -> &Nat {
        &self.p
    }

    pub fn q(&self) -> &Nat {
        &self.q
    }

    pub fn g(&self) -> &Nat {
        &self.g
    }

    pub fn generator_order(&self) -> GeneratorOrder {
        self.order
    }

    /// Order of `g` as an integer: `q` or `2q`.
    pub fn order(&self) -> Nat {
        match self.order {
            GeneratorOrder::FullGroup => &self.q << 1,
            GeneratorOrder::QrSubgroup => self.q.clone(),
        }
    }

    pub fn bits(&self) -> u64 {
        self.p.bits()
    }

    /// `x` lies in `[1, p-1]`.
    pub fn in_range(&self, x: &Nat) -> bool {
        !x.is_zero() && *x < self.p
    }
}

fn safe_prime_half(p: &Nat) -> Result<Nat> {
    if *p < Nat::from(5u8) || p.is_even() {
        return Err(Error::param(format!("{p} is not an odd prime >= 5")));
    }
    let q = (p - 1u8) >> 1;
    if !is_probable_prime(p, DEFAULT_MR_ROUNDS) {
        return Err(Error::param(format!("{p} is not prime")));
    }
    if !is_probable_prime(&q, DEFAULT_MR_ROUNDS) {
        return Err(Error::param(format!("(p-1)/2 = {q} is not prime")));
    }
    Ok(q)
}

/// Smallest quadratic non-residue `>= 2`.
pub fn smallest_non_residue(p: &Nat) -> Nat {
    let mut g = Nat::from(2u8);
    while jacobi(&g, p).expect("p is an odd prime") != -1 {
        g += 1u8;
    }
    g
}

fn select_generator(p: &Nat, order: GeneratorOrder) -> Nat {
    let g = smallest_non_residue(p);
    match order {
        GeneratorOrder::FullGroup => g,
        GeneratorOrder::QrSubgroup => (&g * &g) % p,
    }
}

/// Generates a `bits`-bit safe prime and a generator of the requested order.
pub fn gen_safe_prime<R: Rng + ?Sized>(
    bits: u64,
    order: GeneratorOrder,
    rng: &mut R,
) -> Result<GroupParams> {
    if !(MIN_SAFE_PRIME_BITS..=MAX_SAFE_PRIME_BITS).contains(&bits) {
        return Err(Error::param(format!(
            "safe prime size must be in {MIN_SAFE_PRIME_BITS}..={MAX_SAFE_PRIME_BITS} bits, got {bits}"
        )));
    }
    let q = if bits <= 64 {
        search_small(bits, rng)
    } else {
        search_sieved(bits, rng)
    };
    let p = (&q << 1) + 1u8;
    let g = select_generator(&p, order);
    Ok(GroupParams { p, q, g, order })
}

fn random_half<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Nat {
    // q has bits - 1 bits so that p = 2q + 1 has exactly `bits`
    let mut q = rng.gen_biguint(bits - 1);
    q.set_bit(bits - 2, true);
    q.set_bit(0, true);
    q
}

fn search_small<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Nat {
    loop {
        let q = random_half(bits, rng);
        if is_probable_prime(&q, DEFAULT_MR_ROUNDS)
            && is_probable_prime(&((&q << 1) + 1u8), DEFAULT_MR_ROUNDS)
        {
            return q;
        }
    }
}

const SIEVE_WINDOW: usize = 1 << 14;

/// Sieves a window of candidates `q0 + 2k` so that neither `q` nor `2q + 1`
/// has a factor below 2^16, then runs the expensive tests on the survivors.
fn search_sieved<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Nat {
    let two = Nat::from(2u8);
    loop {
        let q0 = random_half(bits, rng);
        let mut dead = vec![false; SIEVE_WINDOW];
        for &l in small_primes() {
            let r = (&q0 % l).to_u64().expect("residue fits") ;
            let l64 = l as u64;
            let inv2 = l64.div_ceil(2);
            // q = 0 (mod l)
            let k1 = ((l64 - r) % l64) * inv2 % l64;
            // 2q + 1 = 0 (mod l), i.e. q = (l - 1)/2
            let k2 = (((l64 - 1) / 2 + l64 - r) % l64) * inv2 % l64;
            for start in [k1, k2] {
                let mut k = start as usize;
                while k < SIEVE_WINDOW {
                    dead[k] = true;
                    k += l as usize;
                }
            }
        }
        for (k, _) in dead.iter().enumerate().filter(|(_, d)| !**d) {
            let q = &q0 + (k as u64) * 2u64;
            if q.bits() != bits - 1 {
                break;
            }
            let p = (&q << 1) + 1u8;
            // cheap base-2 filters before the full tests
            if !two.modpow(&(&q - 1u8), &q).is_one() {
                continue;
            }
            if !two.modpow(&(&p - 1u8), &p).is_one() {
                continue;
            }
            if is_probable_prime(&q, DEFAULT_MR_ROUNDS) && is_probable_prime(&p, DEFAULT_MR_ROUNDS) {
                return q;
            }
        }
    }
}

/// Parses a decimal string into a [`Nat`].
pub fn parse_nat(s: &str) -> Option<Nat> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Nat::parse_bytes(s.as_bytes(), 10)
}
