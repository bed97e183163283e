use super::field::{ElementMap, Zp};
use crate::error::{Error, Result};

/// Largest subgroup order the table-based solver accepts.
pub const BSGS_MAX_ORDER: u64 = 1 << 50;

/// Baby-step giant-step in the subgroup of order `order` generated by `g`.
pub(crate) fn bsgs_u64(field: Zp, g: u64, h: u64, order: u64) -> Result<u64> {
    if order == 0 || order > BSGS_MAX_ORDER {
        return Err(Error::Unsupported(format!(
            "baby-step giant-step needs 1 <= order <= 2^50, got {order}"
        )));
    }
    let m = (order as f64).sqrt().ceil() as u64;
    let m = if m * m < order { m + 1 } else { m };

    let mut table: ElementMap<u64> = ElementMap::default();
    table.reserve(m as usize);
    let mut e = 1 % field.p;
    for j in 0..m {
        table.entry(e).or_insert(j);
        e = field.mul(e, g);
    }

    // g^(-m) = g^(order - m mod order)
    let giant = field.pow(g, (order - m % order) % order);
    let mut y = h % field.p;
    for i in 0..=m {
        if let Some(&j) = table.get(&y) {
            let x = ((i as u128 * m as u128 + j as u128) % order as u128) as u64;
            if field.pow(g, x) == h % field.p {
                return Ok(x);
            }
        }
        y = field.mul(y, giant);
    }
    Err(Error::NotInSubgroup)
}
