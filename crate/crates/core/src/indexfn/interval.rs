//! Outward-rounded interval arithmetic on arbitrary-precision binary floats.
//!
//! Every operation rounds its lower endpoint down and its upper endpoint up,
//! so the true value of an expression always lies inside the computed
//! interval. A floor is certified when both endpoints share it.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Precision rungs, in bits, tried in order before giving up.
pub const PRECISION_LADDER: [usize; 6] = [128, 256, 512, 1024, 2048, 4096];

/// Last rung of [`PRECISION_LADDER`].
pub const PRECISION_CAP: u32 = 4096;

#[derive(Debug, Clone)]
pub struct Interval {
    pub lo: BigFloat,
    pub hi: BigFloat,
}

impl Interval {
    fn is_valid(&self) -> bool {
        !self.lo.is_nan() && !self.hi.is_nan() && !self.lo.is_inf() && !self.hi.is_inf()
    }

    fn is_positive(&self) -> bool {
        self.lo.is_positive() && !self.lo.is_zero()
    }

    /// Common floor of both endpoints, if there is one and it fits in 128 bits.
    pub fn certified_floor(&self) -> Option<u128> {
        if !self.is_valid() {
            return None;
        }
        let lo = self.lo.floor();
        let hi = self.hi.floor();
        if lo.cmp(&hi) != Some(0) {
            return None;
        }
        integer_to_u128(&lo)
    }

    /// Midpoint rounded to `f64`; diagnostic only.
    pub fn midpoint_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().unwrap_or(f64::NAN)
}

/// Converts a nonnegative integral `BigFloat` to `u128`.
pub fn integer_to_u128(x: &BigFloat) -> Option<u128> {
    if x.is_zero() {
        return Some(0);
    }
    let (words, _bits, sign, exp, _inexact) = x.as_raw_parts()?;
    if sign == Sign::Neg {
        return None;
    }
    if exp <= 0 {
        return Some(0);
    }
    let mantissa = BigUint::from_slice(
        &words
            .iter()
            .flat_map(|w| [*w as u32, (*w >> 32) as u32])
            .collect::<Vec<_>>(),
    );
    let width = 64 * words.len() as i64;
    let shift = width - i64::from(exp);
    let value = if shift >= 0 {
        mantissa >> shift as u64
    } else {
        mantissa << (-shift) as u64
    };
    value.to_u128()
}

/// Evaluation context for one precision rung.
pub struct IntervalCtx {
    prec: usize,
    cc: Consts,
}

impl IntervalCtx {
    pub fn new(prec: usize) -> Self {
        IntervalCtx {
            prec,
            cc: Consts::new().expect("astro-float constant cache"),
        }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    /// Exact point interval (precision is at least 64 bits).
    pub fn point_u64(&self, n: u64) -> Interval {
        let v = BigFloat::from_u64(n, self.prec.max(64));
        Interval { lo: v.clone(), hi: v }
    }

    /// Enclosure of `num / den`.
    pub fn ratio(&self, num: i64, den: i64) -> Interval {
        let p = self.prec.max(64);
        let n = BigFloat::from_i64(num, p);
        let d = BigFloat::from_i64(den, p);
        Interval {
            lo: n.div(&d, self.prec, RoundingMode::Down),
            hi: n.div(&d, self.prec, RoundingMode::Up),
        }
    }

    pub fn add(&self, a: &Interval, b: &Interval) -> Interval {
        Interval {
            lo: a.lo.add(&b.lo, self.prec, RoundingMode::Down),
            hi: a.hi.add(&b.hi, self.prec, RoundingMode::Up),
        }
    }

    pub fn mul(&self, a: &Interval, b: &Interval) -> Interval {
        let corners = [(&a.lo, &b.lo), (&a.lo, &b.hi), (&a.hi, &b.lo), (&a.hi, &b.hi)];
        let mut lo: Option<BigFloat> = None;
        let mut hi: Option<BigFloat> = None;
        for (x, y) in corners {
            let down = x.mul(y, self.prec, RoundingMode::Down);
            let up = x.mul(y, self.prec, RoundingMode::Up);
            lo = Some(match lo {
                Some(cur) if cur.cmp(&down).is_some_and(|c| c <= 0) => cur,
                _ => down,
            });
            hi = Some(match hi {
                Some(cur) if cur.cmp(&up).is_some_and(|c| c >= 0) => cur,
                _ => up,
            });
        }
        Interval {
            lo: lo.expect("four corners"),
            hi: hi.expect("four corners"),
        }
    }

    /// Natural logarithm; `None` unless the interval is strictly positive.
    pub fn ln(&mut self, a: &Interval) -> Option<Interval> {
        if !a.is_positive() {
            return None;
        }
        let out = Interval {
            lo: a.lo.ln(self.prec, RoundingMode::Down, &mut self.cc),
            hi: a.hi.ln(self.prec, RoundingMode::Up, &mut self.cc),
        };
        out.is_valid().then_some(out)
    }

    pub fn exp(&mut self, a: &Interval) -> Option<Interval> {
        let out = Interval {
            lo: a.lo.exp(self.prec, RoundingMode::Down, &mut self.cc),
            hi: a.hi.exp(self.prec, RoundingMode::Up, &mut self.cc),
        };
        out.is_valid().then_some(out)
    }

    /// `x^c` for strictly positive `x`, as `exp(c ln x)`.
    pub fn pow(&mut self, x: &Interval, c: &Interval) -> Option<Interval> {
        let l = self.ln(x)?;
        let e = self.mul(c, &l);
        self.exp(&e)
    }
}
