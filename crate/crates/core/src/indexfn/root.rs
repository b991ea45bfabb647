//! Exact integer roots.
//!
//! `⌊(scale·n^{p/q})⌋` is the largest `r` with `r^q ≤ scale^q·n^p`. A floating
//! estimate seeds the search and an exact comparison pass settles it.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `r` with `r^q ≤ value`, by integer Newton iteration from a floating seed.
pub fn nth_root_floor(value: &BigUint, q: u32) -> BigUint {
    assert!(q >= 1, "root index must be positive");
    if q == 1 || value.is_zero() {
        return value.clone();
    }
    let seed = match value.to_f64() {
        Some(v) if v.is_finite() && v < 1e300 => {
            let est = v.powf(1.0 / f64::from(q));
            BigUint::from((est * (1.0 + 1e-12)).ceil() as u128) + 1u8
        }
        _ => BigUint::one() << value.bits().div_ceil(u64::from(q)),
    };

    // One unconditional step puts the iterate at or above the root (AM-GM),
    // after which the sequence decreases until it stalls.
    let qm1 = q - 1;
    let step = |x: &BigUint| -> BigUint { (x * qm1 + value / x.pow(qm1)) / q };
    let mut x = step(&seed).max(BigUint::one());
    loop {
        let next = step(&x);
        if next >= x {
            break;
        }
        x = next;
    }
    settle(x, q, value)
}

fn settle(mut x: BigUint, q: u32, value: &BigUint) -> BigUint {
    while x.pow(q) > *value {
        x -= 1u8;
    }
    loop {
        let up = &x + 1u8;
        if up.pow(q) <= *value {
            x = up;
        } else {
            return x;
        }
    }
}

fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// `⌊scale · n^{p/q}⌋`, exactly.
pub fn floor_rational_power(n: u64, p: u32, q: u32, scale: u64) -> Result<u128> {
    if p == 0 || q == 0 {
        return Err(Error::Invalid(format!("exponent {p}/{q} must have positive terms")));
    }
    if n == 0 || scale == 0 {
        return Ok(0);
    }
    let est = ((f64::from(p) / f64::from(q)) * (n as f64).ln() + (scale as f64).ln()).exp();

    // target = scale^q * n^p
    let small_target = checked_pow(u128::from(scale), q)
        .and_then(|s| checked_pow(u128::from(n), p).and_then(|np| s.checked_mul(np)));

    if let Some(target) = small_target {
        if est < 2f64.powi(50) {
            let mut r = est.floor() as u128;
            while checked_pow(r, q).is_none_or(|v| v > target) {
                r -= 1;
            }
            while checked_pow(r + 1, q).is_some_and(|v| v <= target) {
                r += 1;
            }
            return Ok(r);
        }
    }

    let target = BigUint::from(scale).pow(q) * BigUint::from(n).pow(p);
    let root = if est < 2f64.powi(50) {
        settle(BigUint::from(est.floor() as u128), q, &target)
    } else {
        nth_root_floor(&target, q)
    };
    root.to_u128()
        .ok_or_else(|| Error::Overflow(format!("floor({scale}*{n}^({p}/{q})) exceeds 128 bits")))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Binary search on `r^q ≤ v`, independent of the Newton path.
    fn bisect_root(v: &BigUint, q: u32) -> BigUint {
        let mut lo = BigUint::zero();
        let mut hi = BigUint::one() << (v.bits() / u64::from(q) + 1);
        while lo < hi {
            let mid: BigUint = (&lo + &hi + 1u8) >> 1;
            if mid.pow(q) <= *v {
                lo = mid;
            } else {
                hi = mid - 1u8;
            }
        }
        lo
    }

    #[test]
    fn rational_power_examples() {
        assert_eq!(floor_rational_power(4, 3, 2, 1).unwrap(), 8);
        assert_eq!(floor_rational_power(1_000_000, 6, 5, 1).unwrap(), 15_848_931);
        assert_eq!(floor_rational_power(3, 6, 5, 1).unwrap(), 3);
        assert_eq!(floor_rational_power(4, 6, 5, 1).unwrap(), 5);
        assert_eq!(floor_rational_power(0, 6, 5, 1).unwrap(), 0);
        assert_eq!(floor_rational_power(17, 1, 1, 3).unwrap(), 51);
    }

    #[test]
    fn big_targets_agree_with_bisection() {
        for &(n, p, q, scale) in &[
            (10_000_000u64, 6u32, 5u32, 1u64),
            (987_654_321, 13, 10, 7),
            (u64::MAX, 5, 4, 1),
            (123_456_789_012, 4, 3, 1000),
        ] {
            let target = BigUint::from(scale).pow(q) * BigUint::from(n).pow(p);
            let expect = bisect_root(&target, q).to_u128().unwrap();
            assert_eq!(floor_rational_power(n, p, q, scale).unwrap(), expect, "{n} {p}/{q}");
        }
    }

    #[test]
    fn newton_root_on_perfect_powers() {
        for q in 1..8u32 {
            for base in [1u64, 2, 3, 1_000_003, u64::MAX] {
                let b = BigUint::from(base);
                let v = b.pow(q);
                assert_eq!(nth_root_floor(&v, q), b);
                assert_eq!(nth_root_floor(&(&v - 1u8), q), &b - 1u8);
            }
        }
        let huge = BigUint::one() << 5000u32;
        assert_eq!(nth_root_floor(&huge, 5), BigUint::one() << 1000u32);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(floor_rational_power(u64::MAX, 3, 1, 1), Err(Error::Overflow(_))));
    }
}
