use rand::Rng;

use super::field::{inv_mod_prime, mul_mod, Zp};
use crate::error::{Error, Result};

const PARTITIONS: usize = 32;

#[derive(Debug, Clone, Copy)]
struct Point {
    y: u64,
    a: u64,
    b: u64,
}

/// Additive walk: each partition multiplies by a fixed `g^u h^v`.
struct Walk {
    field: Zp,
    order: u64,
    steps: [(u64, u64, u64); PARTITIONS],
}

impl Walk {
    fn new<R: Rng + ?Sized>(field: Zp, g: u64, h: u64, order: u64, rng: &mut R) -> Self {
        let steps = std::array::from_fn(|_| {
            let u = rng.gen_range(0..order);
            let v = rng.gen_range(0..order);
            (field.mul(field.pow(g, u), field.pow(h, v)), u, v)
        });
        Walk { field, order, steps }
    }

    #[inline]
    fn partition(y: u64) -> usize {
        (y.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 59) as usize
    }

    #[inline]
    fn step(&self, pt: Point) -> Point {
        let (mul, u, v) = self.steps[Self::partition(pt.y)];
        Point {
            y: self.field.mul(pt.y, mul),
            a: add_mod(pt.a, u, self.order),
            b: add_mod(pt.b, v, self.order),
        }
    }
}

#[inline]
fn add_mod(x: u64, y: u64, n: u64) -> u64 {
    ((x as u128 + y as u128) % n as u128) as u64
}

/// Default iteration budget: a generous multiple of the expected walk length.
pub(crate) fn default_budget(order: u64) -> u64 {
    ((order as f64).sqrt() * 64.0) as u64 + 10_000
}

/// Pollard rho in a subgroup of prime order, Brent cycle detection.
///
/// Degenerate collisions (equal `b` coefficients) restart the walk with fresh
/// multipliers and a fresh starting point.
pub(crate) fn rho_u64<R: Rng + ?Sized>(
    field: Zp,
    g: u64,
    h: u64,
    order: u64,
    budget: u64,
    rng: &mut R,
) -> Result<u64> {
    let h = h % field.p;
    if order == 1 {
        return Ok(0);
    }
    let mut iterations = 0u64;
    while iterations < budget {
        let walk = Walk::new(field, g, h, order, rng);
        let a0 = rng.gen_range(0..order);
        let b0 = rng.gen_range(0..order);
        let start = Point {
            y: field.mul(field.pow(g, a0), field.pow(h, b0)),
            a: a0,
            b: b0,
        };

        let mut tortoise = start;
        let mut hare = walk.step(start);
        iterations += 1;
        let mut power = 1u64;
        let mut lam = 1u64;
        while tortoise.y != hare.y {
            if iterations >= budget {
                return Err(Error::BudgetExhausted { iterations });
            }
            if power == lam {
                tortoise = hare;
                power <<= 1;
                lam = 0;
            }
            hare = walk.step(hare);
            lam += 1;
            iterations += 1;
        }

        // g^a_t h^b_t = g^a_h h^b_h  =>  x (b_t - b_h) = a_h - a_t
        let db = (tortoise.b + order - hare.b) % order;
        if db == 0 {
            continue;
        }
        let da = (hare.a + order - tortoise.a) % order;
        let x = mul_mod(da, inv_mod_prime(db, order), order);
        if field.pow(g, x) == h {
            return Ok(x);
        }
    }
    Err(Error::BudgetExhausted { iterations })
}
