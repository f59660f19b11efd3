//! First entry of a linear orbit `a*x + b (mod m)` into a window.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Smallest `x >= 0` with `l <= (a*x + b) mod m <= r`, for `m > 0` and
/// `0 <= l <= r < m`. Runs in `O(log m)` steps.
pub fn first_in_window(
    a: &BigInt,
    b: &BigInt,
    m: &BigInt,
    l: &BigInt,
    r: &BigInt,
) -> Option<BigInt> {
    debug_assert!(m.is_positive() && !l.is_negative() && l <= r && r < m);
    let a = a.mod_floor(m);
    let b = b.mod_floor(m);
    if l <= &b && &b <= r {
        return Some(BigInt::zero());
    }
    let (lo, hi) = if &b < l {
        (l - &b, r - &b)
    } else {
        (l - &b + m, r - &b + m)
    };
    first_multiple(&a, m, &lo, &hi)
}

/// Smallest `x >= 0` with `l <= (a*x) mod m <= r`, `0 <= l <= r < m`.
fn first_multiple(a: &BigInt, m: &BigInt, l: &BigInt, r: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    if l.is_zero() {
        return Some(BigInt::zero());
    }
    if a.is_zero() {
        return None;
    }
    let x = l.div_ceil(&a);
    if &(&a * &x) <= r {
        return Some(x);
    }
    // No multiple of a lies in [l, r]; count wraps y instead: the least y with
    // a multiple of a in [l + m*y, r + m*y].
    let lr = l.mod_floor(&a);
    let rr = r.mod_floor(&a);
    let y = first_multiple(&m.mod_floor(&a), &a, &(&a - &rr), &(&a - &lr))?;
    Some((l + m * y).div_ceil(&a))
}
