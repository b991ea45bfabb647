//! Index functions `f` and exact evaluation of `⌊f(n)⌋`.
//!
//! Rational powers are floored through exact integer roots. Every other
//! family is evaluated on a precision ladder: a double-precision rung with a
//! wide error budget, then outward-rounded interval arithmetic at 128 to 4096
//! bits. A floor that cannot be certified at the last rung is an error, never
//! a guess.

mod descriptor;
mod hypotheses;
pub mod interval;
pub mod root;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use interval::{Interval, IntervalCtx, PRECISION_CAP, PRECISION_LADDER};

pub use hypotheses::{
    admissible_pairs, check_derivative_inequalities, check_hypotheses, DecileTrend, DerivativeInequality,
    HypothesisReport, InequalityReport, InequalityViolation, PowerBoundCheck,
};

/// Relative error budget of the double-precision rung. Each libm call is
/// within a few ulps (2^-52); the budget leaves twelve bits of headroom.
const F64_RUNG_REL_ERR: f64 = 1.0 / (1u64 << 40) as f64;

/// Length of the integer scans used to locate `x0` and `A0`.
const SCAN_CAP: u64 = 1_000_000;

/// Octave span of the grid on which the growth conditions are sampled.
const GRID_OCTAVES: i32 = 48;
const GRID_STEPS_PER_OCTAVE: i32 = 8;

/// Exact rational parameter (decimal inputs are stored exactly).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Real(pub Ratio<i64>);

impl Real {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Invalid("zero denominator".into()));
        }
        Ok(Real(Ratio::new(num, den)))
    }

    pub fn from_integer(v: i64) -> Self {
        Real(Ratio::from_integer(v))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    fn is_positive(self) -> bool {
        self.numer() > 0
    }
}

impl std::fmt::Display for Real {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Catalog of index-function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `x^{p/q}`, floored exactly.
    RationalPower { p: u32, q: u32 },
    /// `x^c`.
    RealPower { c: Real },
    /// `x^c (log x)^η`.
    PowerLog { c: Real, eta: Real },
    /// `x^{c1} + x^{c2}`.
    SumOfPowers { c1: Real, c2: Real },
    /// `x exp(log^{1-ε} x)`, `0 < ε < 1`.
    ExpPowerLog { eps: Real },
    /// `x exp((log log x)^{1+ε})`, `ε > 0`.
    ExpLogLog { eps: Real },
    /// `x log x`.
    NLogN,
}

/// `(f(x), f'(x), f''(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

impl Family {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Invalid(format!("{msg} in {self:?}")));
        match *self {
            Family::RationalPower { p, q } if p == 0 || q == 0 => bad("exponent terms must be positive"),
            Family::RealPower { c } if !c.is_positive() => bad("exponent must be positive"),
            Family::PowerLog { c, .. } if !c.is_positive() => bad("exponent must be positive"),
            Family::SumOfPowers { c1, c2 } if !c1.is_positive() || !c2.is_positive() => {
                bad("exponents must be positive")
            }
            Family::ExpPowerLog { eps } if !(eps.is_positive() && eps.numer() < eps.denom()) => {
                bad("epsilon must lie in (0, 1)")
            }
            Family::ExpLogLog { eps } if !eps.is_positive() => bad("epsilon must be positive"),
            _ => Ok(()),
        }
    }

    /// Smallest integer at which the closed form is defined and nonnegative.
    fn first_index(&self) -> u64 {
        match self {
            Family::RationalPower { .. } | Family::RealPower { .. } | Family::SumOfPowers { .. } => 0,
            Family::PowerLog { .. } => 2,
            Family::ExpPowerLog { .. } | Family::NLogN => 1,
            Family::ExpLogLog { .. } => 3,
        }
    }

    fn derivatives(&self, x: f64) -> Derivatives {
        match *self {
            Family::RationalPower { p, q } => power_derivatives(x, f64::from(p) / f64::from(q)),
            Family::RealPower { c } => power_derivatives(x, c.to_f64()),
            Family::PowerLog { c, eta } => {
                let (c, eta) = (c.to_f64(), eta.to_f64());
                let l = x.ln();
                let value = x.powf(c) * l.powf(eta);
                let first = x.powf(c - 1.0) * l.powf(eta - 1.0) * (c * l + eta);
                let second = x.powf(c - 2.0)
                    * l.powf(eta - 2.0)
                    * (c * (c - 1.0) * l * l + eta * (2.0 * c - 1.0) * l + eta * (eta - 1.0));
                Derivatives { value, first, second }
            }
            Family::SumOfPowers { c1, c2 } => {
                let a = power_derivatives(x, c1.to_f64());
                let b = power_derivatives(x, c2.to_f64());
                Derivatives {
                    value: a.value + b.value,
                    first: a.first + b.first,
                    second: a.second + b.second,
                }
            }
            Family::ExpPowerLog { eps } => {
                let a = 1.0 - eps.to_f64();
                let l = x.ln();
                let e = l.powf(a).exp();
                let g = a * l.powf(a - 1.0);
                Derivatives {
                    value: x * e,
                    first: e * (1.0 + g),
                    second: e / x * (g * (1.0 + g) + a * (a - 1.0) * l.powf(a - 2.0)),
                }
            }
            Family::ExpLogLog { eps } => {
                let b = 1.0 + eps.to_f64();
                let l = x.ln();
                let g = l.ln();
                let e = g.powf(b).exp();
                let w = b * g.powf(b - 1.0) / l;
                let tail = b / (l * l) * ((b - 1.0) * g.powf(b - 2.0) - g.powf(b - 1.0));
                Derivatives {
                    value: x * e,
                    first: e * (1.0 + w),
                    second: e / x * (w * (1.0 + w) + tail),
                }
            }
            Family::NLogN => {
                let l = x.ln();
                Derivatives {
                    value: x * l,
                    first: l + 1.0,
                    second: 1.0 / x,
                }
            }
        }
    }

    /// Enclosure of `scale · f(n)` at the context's precision.
    fn enclose(&self, n: u64, scale: u64, ctx: &mut IntervalCtx) -> Option<Interval> {
        let x = ctx.point_u64(n);
        let value = match *self {
            Family::RationalPower { p, q } => {
                if n == 0 {
                    ctx.point_u64(0)
                } else {
                    let c = ctx.ratio(i64::from(p), i64::from(q));
                    ctx.pow(&x, &c)?
                }
            }
            Family::RealPower { c } => {
                if n == 0 {
                    ctx.point_u64(0)
                } else {
                    let c = ctx.ratio(c.numer(), c.denom());
                    ctx.pow(&x, &c)?
                }
            }
            Family::SumOfPowers { c1, c2 } => {
                if n == 0 {
                    ctx.point_u64(0)
                } else {
                    let c1 = ctx.ratio(c1.numer(), c1.denom());
                    let c2 = ctx.ratio(c2.numer(), c2.denom());
                    let a = ctx.pow(&x, &c1)?;
                    let b = ctx.pow(&x, &c2)?;
                    ctx.add(&a, &b)
                }
            }
            Family::PowerLog { c, eta } => {
                let l = ctx.ln(&x)?;
                let ll = ctx.ln(&l)?;
                let c = ctx.ratio(c.numer(), c.denom());
                let eta = ctx.ratio(eta.numer(), eta.denom());
                let a = ctx.mul(&c, &l);
                let b = ctx.mul(&eta, &ll);
                let s = ctx.add(&a, &b);
                ctx.exp(&s)?
            }
            Family::ExpPowerLog { eps } => {
                if n == 1 {
                    ctx.point_u64(1)
                } else {
                    let a = ctx.ratio(eps.denom() - eps.numer(), eps.denom());
                    let l = ctx.ln(&x)?;
                    let ll = ctx.ln(&l)?;
                    let u = ctx.mul(&a, &ll);
                    let u = ctx.exp(&u)?;
                    let s = ctx.add(&l, &u);
                    ctx.exp(&s)?
                }
            }
            Family::ExpLogLog { eps } => {
                let b = ctx.ratio(eps.denom() + eps.numer(), eps.denom());
                let l = ctx.ln(&x)?;
                let ll = ctx.ln(&l)?;
                let lll = ctx.ln(&ll)?;
                let v = ctx.mul(&b, &lll);
                let v = ctx.exp(&v)?;
                let s = ctx.add(&l, &v);
                ctx.exp(&s)?
            }
            Family::NLogN => {
                let l = ctx.ln(&x)?;
                ctx.mul(&x, &l)
            }
        };
        Some(ctx.mul(&value, &ctx.point_u64(scale)))
    }
}

fn power_derivatives(x: f64, c: f64) -> Derivatives {
    Derivatives {
        value: x.powf(c),
        first: c * x.powf(c - 1.0),
        second: c * (c - 1.0) * x.powf(c - 2.0),
    }
}

/// Anything whose scaled floors and derivatives can be evaluated.
///
/// The dissection and counting routines are written against this trait so
/// that they can also be driven by test functions outside the catalog.
pub trait IndexMap: Sync {
    /// `⌊scale · f(n)⌋`.
    fn scaled_floor(&self, n: u64, scale: u64) -> Result<u128>;

    /// `⌊f(n)⌋`.
    fn floor(&self, n: u64) -> Result<u128> {
        self.scaled_floor(n, 1)
    }

    fn derivative(&self, x: f64) -> f64;

    fn second_derivative(&self, x: f64) -> f64;

    /// First index of the generated sequence.
    fn first_index(&self) -> u64;
}

/// An index function together with its domain thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexFunction {
    family: Family,
    first_index: u64,
    x0: u64,
    a0: Option<u64>,
    regular: bool,
}

impl IndexFunction {
    /// Validates the parameters and scans for `x0` and `A0`.
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        let family = match family {
            Family::RationalPower { p, q } => {
                let g = num_integer::gcd(p, q);
                Family::RationalPower { p: p / g, q: q / g }
            }
            other => other,
        };
        let first_index = family.first_index();
        let start = first_index.max(1);
        let x0 = first_passing(start, |x| growth_conditions_hold(&family, x as f64));
        let regular = x0.is_some();
        let x0 = x0.unwrap_or(start);
        let a0 = if regular {
            first_passing(2 * x0, |a| slope_condition_holds(&family, a as f64))
        } else {
            None
        };
        Ok(IndexFunction {
            family,
            first_index,
            x0,
            a0,
            regular,
        })
    }

    pub fn rational_power(p: u32, q: u32) -> Result<Self> {
        Self::new(Family::RationalPower { p, q })
    }

    pub fn real_power(c: Real) -> Result<Self> {
        Self::new(Family::RealPower { c })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Threshold from which positivity and the doubling bound on `f''` hold.
    pub fn x0(&self) -> u64 {
        self.x0
    }

    /// Smallest `A ≥ 2 x0` with `A f''(A) ≥ 2` from there on, if found within the scan cap.
    pub fn a0(&self) -> Option<u64> {
        self.a0
    }

    /// Whether positivity and the doubling bound were found to hold from `x0` on.
    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// `1 < p/q < 4/3` for rational powers; `None` for other families.
    pub fn theorem_compliant(&self) -> Option<bool> {
        match self.family {
            Family::RationalPower { p, q } => {
                let (p, q) = (u64::from(p), u64::from(q));
                Some(p > q && 3 * p < 4 * q)
            }
            _ => None,
        }
    }

    /// Closed-form `(f, f', f'')` at `x ≥ x0`.
    pub fn eval_derivatives(&self, x: f64) -> Result<Derivatives> {
        if x.is_nan() || x < self.x0 as f64 {
            return Err(Error::Domain(format!("x = {x} below x0 = {}", self.x0)));
        }
        Ok(self.family.derivatives(x))
    }

    pub(crate) fn derivatives_unchecked(&self, x: f64) -> Derivatives {
        self.family.derivatives(x)
    }

    /// `⌊f(n)⌋`.
    pub fn eval_floor(&self, n: u64) -> Result<u128> {
        self.scaled_floor(n, 1)
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n < self.first_index {
            return Err(Error::Domain(format!(
                "n = {n} below the first admissible index {}",
                self.first_index
            )));
        }
        Ok(())
    }

    /// `⌊scale · f(n)⌋` from the interval ladder alone, skipping exact and
    /// double-precision shortcuts.
    pub fn eval_floor_interval(&self, n: u64, scale: u64) -> Result<u128> {
        self.check_index(n)?;
        for &prec in PRECISION_LADDER.iter() {
            let mut ctx = IntervalCtx::new(prec);
            if let Some(v) = self.family.enclose(n, scale, &mut ctx).and_then(|iv| iv.certified_floor()) {
                return Ok(v);
            }
        }
        Err(Error::FloorUndecidable {
            n,
            precision_cap: PRECISION_CAP,
        })
    }

    fn f64_rung(&self, n: u64, scale: u64) -> Option<u128> {
        let v = self.family.derivatives(n as f64).value * scale as f64;
        if !v.is_finite() || v >= (1u64 << 52) as f64 {
            return None;
        }
        let err = v.abs() * F64_RUNG_REL_ERR + f64::MIN_POSITIVE;
        let lo = (v - err).floor();
        let hi = (v + err).floor();
        (lo == hi && lo >= 0.0).then_some(lo as u128)
    }
}

impl IndexMap for IndexFunction {
    fn scaled_floor(&self, n: u64, scale: u64) -> Result<u128> {
        self.check_index(n)?;
        match self.family {
            Family::RationalPower { p, q } => return root::floor_rational_power(n, p, q, scale),
            Family::RealPower { c } if c.denom() == 1 && c.numer() > 0 => {
                let exp = u32::try_from(c.numer()).map_err(|_| Error::Overflow("exponent".into()))?;
                return u128::from(n)
                    .checked_pow(exp)
                    .and_then(|v| v.checked_mul(u128::from(scale)))
                    .ok_or_else(|| Error::Overflow(format!("{scale}*{n}^{exp}")));
            }
            _ => {}
        }
        if let Some(v) = self.f64_rung(n, scale) {
            return Ok(v);
        }
        match self.eval_floor_interval(n, scale) {
            Err(Error::FloorUndecidable { .. }) => self.exact_fallback(n, scale),
            other => other,
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        self.family.derivatives(x).first
    }

    fn second_derivative(&self, x: f64) -> f64 {
        self.family.derivatives(x).second
    }

    fn first_index(&self) -> u64 {
        self.first_index
    }
}

impl IndexFunction {
    /// Rational exponents that land on an integer can still be floored exactly.
    fn exact_fallback(&self, n: u64, scale: u64) -> Result<u128> {
        if let Family::RealPower { c } = self.family {
            let (a, b) = (c.numer(), c.denom());
            if let (Ok(a), Ok(b)) = (u32::try_from(a), u32::try_from(b)) {
                if f64::from(a) * (n.max(2) as f64).log2() < 20_000.0 {
                    return root::floor_rational_power(n, a, b, scale);
                }
            }
        }
        Err(Error::FloorUndecidable {
            n,
            precision_cap: PRECISION_CAP,
        })
    }
}

fn grid(x: f64) -> impl Iterator<Item = f64> {
    (0..=GRID_OCTAVES * GRID_STEPS_PER_OCTAVE)
        .map(move |j| x * 2f64.powf(f64::from(j) / f64::from(GRID_STEPS_PER_OCTAVE)))
}

/// Positivity of `f, f', f''` and `f''(x)/2 ≤ f''(y) ≤ f''(x)` for `x ≤ y ≤ 2x`,
/// sampled on a log grid starting at `x`.
fn growth_conditions_hold(family: &Family, x: f64) -> bool {
    let pts: Vec<Derivatives> = grid(x).map(|t| family.derivatives(t)).collect();
    let positive = pts.iter().all(|d| {
        d.value.is_finite() && d.first.is_finite() && d.second.is_finite()
            && d.value > 0.0 && d.first > 0.0 && d.second > 0.0
    });
    if !positive {
        return false;
    }
    let steps = GRID_STEPS_PER_OCTAVE as usize;
    (0..pts.len()).all(|j| {
        let base = pts[j].second;
        (1..=steps).filter(|i| j + i < pts.len()).all(|i| {
            let y = pts[j + i].second;
            y <= base * (1.0 + 1e-12) && y >= 0.5 * base * (1.0 - 1e-12)
        })
    })
}

fn slope_condition_holds(family: &Family, a: f64) -> bool {
    grid(a).all(|t| t * family.derivatives(t).second >= 2.0)
}

/// Smallest integer in `[start, start + SCAN_CAP]` satisfying a predicate that
/// is monotone (false, then true), by galloping then bisection.
fn first_passing(start: u64, pred: impl Fn(u64) -> bool) -> Option<u64> {
    if pred(start) {
        return Some(start);
    }
    let limit = start + SCAN_CAP;
    let mut lo = start;
    let mut step = 1u64;
    let hi = loop {
        let cand = (lo + step).min(limit);
        if pred(cand) {
            break cand;
        }
        if cand == limit {
            return None;
        }
        lo = cand;
        step *= 2;
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
