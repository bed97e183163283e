//! Private-key recovery by discrete logarithms in safe-prime groups.
//!
//! The generic solvers work on word-sized fields (p < 2^63). For a generator
//! of order `2q` the log is split into a log modulo `q`, computed in the
//! residue subgroup, and a parity bit read off the Legendre symbol; the two
//! are glued back together by CRT and checked by re-exponentiation.

mod bsgs;
mod field;
mod rho;

use std::time::{Duration, Instant};

use num_traits::{One, ToPrimitive};
use rand::Rng;

use crate::elgamal::MultiParams;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modmath::{is_probable_prime, jacobi, GeneratorOrder, GroupParams, Nat, DEFAULT_MR_ROUNDS};
use crate::rng;

pub use bsgs::BSGS_MAX_ORDER;
use field::{to_u64, Zp};

/// Baby-step giant-step: `x` in `[0, order)` with `g^x = h (mod p)`.
pub fn bsgs(g: &Nat, h: &Nat, order: &Nat, p: &Nat) -> Result<Nat> {
    let field = Zp::new(p)?;
    let order = to_u64(order, "subgroup order")?;
    let x = bsgs::bsgs_u64(field, to_u64(&(g % p), "g")?, to_u64(&(h % p), "h")?, order)?;
    Ok(Nat::from(x))
}

/// Pollard rho with the default iteration budget. `order` must be prime.
pub fn pollard_rho<R: Rng + ?Sized>(g: &Nat, h: &Nat, order: &Nat, p: &Nat, rng: &mut R) -> Result<Nat> {
    let budget = rho::default_budget(to_u64(order, "subgroup order")?);
    pollard_rho_with_budget(g, h, order, p, budget, rng)
}

pub fn pollard_rho_with_budget<R: Rng + ?Sized>(
    g: &Nat,
    h: &Nat,
    order: &Nat,
    p: &Nat,
    budget: u64,
    rng: &mut R,
) -> Result<Nat> {
    let field = Zp::new(p)?;
    if !is_probable_prime(order, DEFAULT_MR_ROUNDS) {
        return Err(Error::param("pollard rho needs a prime subgroup order"));
    }
    let order_u = to_u64(order, "subgroup order")?;
    let g = to_u64(&(g % p), "g")?;
    let h = to_u64(&(h % p), "h")?;
    if field.pow(h, order_u) != 1 % field.p {
        return Err(Error::NotInSubgroup);
    }
    rho::rho_u64(field, g, h, order_u, budget, rng).map(Nat::from)
}

/// Generic solver used inside prime-order subgroups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Baby-step giant-step up to [`AUTO_BSGS_LIMIT`], Pollard rho beyond.
    #[default]
    Auto,
    Bsgs,
    Rho,
}

/// Largest order for which [`Solver::Auto`] picks the table-based solver.
pub const AUTO_BSGS_LIMIT: u64 = 1 << 42;

#[derive(Debug, Clone)]
pub struct DlpOptions {
    pub solver: Solver,
    /// Iteration cap for Pollard rho; `None` uses a multiple of `sqrt(order)`.
    pub budget: Option<u64>,
    /// Seed for the randomized walk.
    pub seed: u64,
}

impl Default for DlpOptions {
    fn default() -> Self {
        DlpOptions {
            solver: Solver::Auto,
            budget: None,
            seed: 0x5eed,
        }
    }
}

/// A discrete-log problem in the group described by `params`.
#[derive(Debug, Clone)]
pub struct DlpInstance {
    pub params: GroupParams,
    pub target: Nat,
    pub options: DlpOptions,
}

impl DlpInstance {
    /// Checks `1 <= target <= p-1` and `target^order(g) = 1`.
    pub fn new(params: GroupParams, target: Nat, options: DlpOptions) -> Result<Self> {
        if !params.in_range(&target) {
            return Err(Error::param("target must lie in [1, p-1]"));
        }
        if !target.modpow(&params.order(), params.p()).is_one() {
            return Err(Error::NotInSubgroup);
        }
        Ok(DlpInstance {
            params,
            target,
            options,
        })
    }

    /// Log of the target to base `g`, in `[0, order(g))`.
    pub fn solve(&self) -> Result<Nat> {
        match self.params.generator_order() {
            GeneratorOrder::FullGroup => solve_safe_prime_dlog_with(&self.params, &self.target, &self.options),
            GeneratorOrder::QrSubgroup => {
                let p = self.params.p();
                let x = solve_prime_order(self.params.g(), &self.target, self.params.q(), p, &self.options)?;
                verify(self.params.g(), &x, &self.target, p)?;
                Ok(x)
            }
        }
    }
}

fn solve_prime_order(g: &Nat, h: &Nat, order: &Nat, p: &Nat, opts: &DlpOptions) -> Result<Nat> {
    let order_u = to_u64(order, "subgroup order")?;
    let use_bsgs = match opts.solver {
        Solver::Bsgs => true,
        Solver::Rho => false,
        Solver::Auto => order_u <= AUTO_BSGS_LIMIT,
    };
    if use_bsgs {
        bsgs(g, h, order, p)
    } else {
        let budget = opts.budget.unwrap_or_else(|| rho::default_budget(order_u));
        pollard_rho_with_budget(g, h, order, p, budget, &mut rng::seeded(opts.seed))
    }
}

fn verify(g: &Nat, x: &Nat, h: &Nat, p: &Nat) -> Result<()> {
    if g.modpow(x, p) != h % p {
        return Err(Error::Inconsistent(format!("g^{x} != {h} (mod {p})")));
    }
    Ok(())
}

/// Log of `h` to a full-group generator (order `2q`).
pub fn solve_safe_prime_dlog(params: &GroupParams, h: &Nat) -> Result<Nat> {
    solve_safe_prime_dlog_with(params, h, &DlpOptions::default())
}

pub fn solve_safe_prime_dlog_with(params: &GroupParams, h: &Nat, opts: &DlpOptions) -> Result<Nat> {
    if params.generator_order() != GeneratorOrder::FullGroup {
        return Err(Error::param("safe-prime front end needs a generator of order 2q"));
    }
    if !params.in_range(h) {
        return Err(Error::param("target must lie in [1, p-1]"));
    }
    let (p, q, g) = (params.p(), params.q(), params.g());

    // project into the order-q subgroup by squaring
    let g2 = (g * g) % p;
    let h2 = (h * h) % p;
    let x_q = solve_prime_order(&g2, &h2, q, p, opts)?;

    let parity = parity_bit(params, h)?;
    let x = crt_with_parity(&x_q, parity, q);
    verify(g, &x, h, p)?;
    Ok(x)
}

/// Parity of `log_g(h)`: `g` is a non-residue, so `h` is a residue exactly
/// when the log is even.
pub fn parity_bit(params: &GroupParams, h: &Nat) -> Result<u8> {
    let p = params.p();
    if jacobi(params.g(), p)? != -1 {
        return Err(Error::param("parity bit needs a non-residue generator"));
    }
    Ok(match jacobi(h, p)? {
        1 => 0,
        -1 => 1,
        _ => return Err(Error::param("target is divisible by p")),
    })
}

/// The unique `x` in `[0, 2q)` with `x = x_q (mod q)` and `x = parity (mod 2)`.
pub fn crt_with_parity(x_q: &Nat, parity: u8, q: &Nat) -> Nat {
    let x_q = x_q % q;
    if x_q.bit(0) == (parity == 1) {
        x_q
    } else {
        // q is odd, so adding it flips the parity
        x_q + q
    }
}

/// Secret key for `pk`, reduced into `[0, order(g))`.
pub fn recover_private_key(params: &GroupParams, pk: &Nat) -> Result<Nat> {
    recover_private_key_with(params, pk, &DlpOptions::default())
}

pub fn recover_private_key_with(params: &GroupParams, pk: &Nat, opts: &DlpOptions) -> Result<Nat> {
    DlpInstance::new(params.clone(), pk.clone(), opts.clone())?.solve()
}

/// Outcome of one level of [`recover_multi_keys`].
#[derive(Debug, Clone)]
pub struct LevelRecovery {
    pub level: usize,
    pub result: Result<Nat>,
    pub elapsed: Duration,
}

/// Recovers the three secret keys independently, up to `workers` at a time.
pub fn recover_multi_keys(mp: &MultiParams, pks: &[Nat; 3], workers: usize) -> [LevelRecovery; 3] {
    recover_multi_keys_with(mp, pks, workers, &DlpOptions::default(), Exec::default())
}

pub fn recover_multi_keys_with(
    mp: &MultiParams,
    pks: &[Nat; 3],
    workers: usize,
    opts: &DlpOptions,
    exec: Exec,
) -> [LevelRecovery; 3] {
    let exec = if workers <= 1 { Exec::Sequential } else { exec };
    let levels = [0usize, 1, 2];
    let results = exec.with_workers(workers.min(3), || {
        exec.map(&levels, |&level| {
            let start = Instant::now();
            let level_opts = DlpOptions {
                seed: opts.seed.wrapping_add(level as u64),
                ..opts.clone()
            };
            let result = recover_private_key_with(mp.level(level), &pks[level], &level_opts);
            LevelRecovery {
                level,
                result,
                elapsed: start.elapsed(),
            }
        })
    });
    let mut it = results.into_iter();
    std::array::from_fn(|_| it.next().expect("three levels"))
}

/// Largest safe-prime size the scenarios accept for key recovery.
pub const MAX_ATTACK_BITS: u64 = 56;

/// `true` when `order` is small enough for interactive key recovery.
pub fn within_ceiling(params: &GroupParams) -> bool {
    params.bits() <= MAX_ATTACK_BITS && params.q().to_u64().is_some()
}
