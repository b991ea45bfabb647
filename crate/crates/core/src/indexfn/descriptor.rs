//! Text descriptors for index functions.
//!
//! Two spellings are accepted, case-insensitively:
//!
//! ```text
//! family=power c=6/5            power:6/5
//! family=powerlog c=1.2 eta=-0.5    powerlog:1.2,-0.5
//! family=sumofpowers c1=1.1 c2=1.3  sum:1.1,1.3
//! family=exppowerlog eps=0.5    exppowerlog:0.5
//! family=exploglog eps=0.5      exploglog:0.5
//! family=nlogn                  nlogn
//! ```
//!
//! Under `power`, an exponent written as an integer or `p/q` selects the exact
//! rational family and a decimal selects the real family. `rationalpower` and
//! `realpower` force the choice. Display always emits the canonical
//! `family=... key=value` form, which parses back to the same family.

use std::fmt;
use std::str::FromStr;

use super::{Family, IndexFunction, Real};
use crate::error::{Error, Result};

const MAX_INPUT: usize = 512;

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parses `p/q`, an integer, or a decimal with optional exponent.
/// The flag is true for decimal spellings.
pub(crate) fn parse_real(text: &str) -> Result<(Real, bool)> {
    let s = text.trim();
    if s.is_empty() {
        return Err(perr("empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| perr(format!("bad numerator in {s:?}")))?;
        let den: i64 = den.trim().parse().map_err(|_| perr(format!("bad denominator in {s:?}")))?;
        if den <= 0 {
            return Err(perr(format!("denominator must be positive in {s:?}")));
        }
        return Ok((Real::new(num, den)?, false));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| perr(format!("bad exponent in {s:?}")))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let is_decimal = body.contains('.') || exponent != 0 || s.contains(['e', 'E']);
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(perr(format!("no digits in {s:?}")));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(perr(format!("invalid number {s:?}")));
    }

    let overflow = || perr(format!("number {s:?} out of range"));
    let mut num: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        num = num.checked_mul(10).and_then(|v| v.checked_add(i64::from(b - b'0'))).ok_or_else(overflow)?;
    }
    let scale = i32::try_from(frac_part.len()).map_err(|_| overflow())? - exponent;
    let (num, den) = if scale >= 0 {
        (num, 10i64.checked_pow(scale as u32).ok_or_else(overflow)?)
    } else {
        (num.checked_mul(10i64.checked_pow((-scale) as u32).ok_or_else(overflow)?).ok_or_else(overflow)?, 1)
    };
    let num = if negative { -num } else { num };
    Ok((Real::new(num, den)?, is_decimal))
}

fn rational_exponent(c: Real) -> Result<Family> {
    let p = u32::try_from(c.numer()).map_err(|_| perr(format!("exponent {c} must be positive")))?;
    let q = u32::try_from(c.denom()).map_err(|_| perr(format!("exponent {c} out of range")))?;
    if p == 0 {
        return Err(perr("exponent must be positive"));
    }
    Ok(Family::RationalPower { p, q })
}

struct Fields<'a> {
    entries: Vec<(String, &'a str)>,
}

impl<'a> Fields<'a> {
    fn take(&mut self, keys: &[&str]) -> Result<&'a str> {
        let pos = self
            .entries
            .iter()
            .position(|(k, _)| keys.contains(&k.as_str()))
            .ok_or_else(|| perr(format!("missing field {}", keys[0])))?;
        Ok(self.entries.remove(pos).1)
    }

    fn take_real(&mut self, keys: &[&str]) -> Result<Real> {
        Ok(parse_real(self.take(keys)?)?.0)
    }

    fn finish(self) -> Result<()> {
        match self.entries.first() {
            Some((k, _)) => Err(perr(format!("unexpected field {k}"))),
            None => Ok(()),
        }
    }
}

fn build(name: &str, mut fields: Fields<'_>) -> Result<Family> {
    let family = match name {
        "power" => {
            let (c, decimal) = parse_real(fields.take(&["c"])?)?;
            if decimal {
                Family::RealPower { c }
            } else {
                rational_exponent(c)?
            }
        }
        "rationalpower" => rational_exponent(fields.take_real(&["c"])?)?,
        "realpower" => Family::RealPower { c: fields.take_real(&["c"])? },
        "powerlog" => Family::PowerLog {
            c: fields.take_real(&["c"])?,
            eta: fields.take_real(&["eta"])?,
        },
        "sumofpowers" | "sum" => Family::SumOfPowers {
            c1: fields.take_real(&["c1"])?,
            c2: fields.take_real(&["c2"])?,
        },
        "exppowerlog" => Family::ExpPowerLog {
            eps: fields.take_real(&["eps", "epsilon"])?,
        },
        "exploglog" => Family::ExpLogLog {
            eps: fields.take_real(&["eps", "epsilon"])?,
        },
        "nlogn" => Family::NLogN,
        other => return Err(perr(format!("unknown family {other:?}"))),
    };
    fields.finish()?;
    family.validate()?;
    Ok(family)
}

/// Positional argument names for the `name:a,b` shorthand.
fn positional_keys(name: &str) -> &'static [&'static str] {
    match name {
        "power" | "rationalpower" | "realpower" => &["c"],
        "powerlog" => &["c", "eta"],
        "sumofpowers" | "sum" => &["c1", "c2"],
        "exppowerlog" | "exploglog" => &["eps"],
        _ => &[],
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        if input.len() > MAX_INPUT {
            return Err(perr("descriptor too long"));
        }
        let lowered = input.trim().to_ascii_lowercase();
        if lowered.is_empty() {
            return Err(perr("empty descriptor"));
        }

        if !lowered.contains('=') {
            let (name, args) = match lowered.split_once(':') {
                Some((n, a)) => (n.trim(), Some(a)),
                None => (lowered.as_str(), None),
            };
            let keys = positional_keys(name);
            let values: Vec<&str> = match args {
                Some(a) => a.split(',').map(str::trim).collect(),
                None => Vec::new(),
            };
            if values.len() != keys.len() {
                return Err(perr(format!(
                    "family {name:?} takes {} argument(s), got {}",
                    keys.len(),
                    values.len()
                )));
            }
            let entries = keys.iter().map(|k| (k.to_string(), "")).zip(values).map(|((k, _), v)| (k, v));
            let fields = Fields {
                entries: entries.collect(),
            };
            return build(name, fields);
        }

        let mut name = None;
        let mut entries = Vec::new();
        for token in lowered.split(|c: char| c.is_whitespace() || c == ';').filter(|t| !t.is_empty()) {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| perr(format!("expected key=value, got {token:?}")))?;
            let key = key.trim();
            if key == "family" {
                if name.replace(value.trim()).is_some() {
                    return Err(perr("family given twice"));
                }
            } else {
                if entries.iter().any(|(k, _): &(String, &str)| k == key) {
                    return Err(perr(format!("field {key} given twice")));
                }
                entries.push((key.to_string(), value));
            }
        }
        let name = name.ok_or_else(|| perr("missing family"))?;
        build(name, Fields { entries })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::RationalPower { p, q } => write!(f, "family=rationalpower c={p}/{q}"),
            Family::RealPower { c } => write!(f, "family=realpower c={c}"),
            Family::PowerLog { c, eta } => write!(f, "family=powerlog c={c} eta={eta}"),
            Family::SumOfPowers { c1, c2 } => write!(f, "family=sumofpowers c1={c1} c2={c2}"),
            Family::ExpPowerLog { eps } => write!(f, "family=exppowerlog eps={eps}"),
            Family::ExpLogLog { eps } => write!(f, "family=exploglog eps={eps}"),
            Family::NLogN => write!(f, "family=nlogn"),
        }
    }
}

impl FromStr for IndexFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IndexFunction::new(s.parse()?)
    }
}

impl fmt::Display for IndexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}
