//! Discrete Fourier coefficients of truncated digit sums.
//!
//! For a phase vector `β`, a correction vector `i` and integers `h, d`,
//!
//! ```text
//! G(h, d) = 2^{-λ} Σ_{u < 2^λ} e( ½ Σ_ℓ β_ℓ s_λ(u + ℓd + i_ℓ) − h u 2^{-λ} )
//! ```
//!
//! With `h = 0` every term is `±1`, so the sum is accumulated as an exact
//! integer. Otherwise the phase is a rational with denominator `2^{λ+1}` and
//! the terms are summed in ascending `u`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::digits::truncated_sum_of_digits;
use crate::error::{Error, Result};

/// Largest `λ` accepted by the enumerating routines.
pub const LAMBDA_CAP: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    /// Coefficients of the original block sum: `α₀ = 1`.
    Alpha,
    /// Coefficients after differencing: `β₀ = 1` and an even number of ones.
    Beta,
}

/// A 0/1 coefficient vector with a leading one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhaseVector {
    bits: Vec<u8>,
    kind: PhaseKind,
}

impl PhaseVector {
    pub fn new(bits: Vec<u8>, kind: PhaseKind) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Invalid("phase vector must be nonempty".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Invalid(format!("phase entries must be 0 or 1, got {b}")));
        }
        if bits[0] != 1 {
            return Err(Error::Invalid("phase vector must start with 1".into()));
        }
        if kind == PhaseKind::Beta && bits.iter().filter(|&&b| b == 1).count() % 2 == 1 {
            return Err(Error::Invalid("beta vector must have an even number of ones".into()));
        }
        Ok(PhaseVector { bits, kind })
    }

    pub fn alpha(bits: &[u8]) -> Result<Self> {
        Self::new(bits.to_vec(), PhaseKind::Alpha)
    }

    pub fn beta(bits: &[u8]) -> Result<Self> {
        Self::new(bits.to_vec(), PhaseKind::Beta)
    }

    /// Parses `101`, `1,0,1` or `(1,0,1)`.
    pub fn parse(text: &str, kind: PhaseKind) -> Result<Self> {
        let body = text.trim();
        let body = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).unwrap_or(body);
        if body.len() > 4096 {
            return Err(Error::Parse("phase vector too long".into()));
        }
        let bits = body
            .chars()
            .filter(|c| !matches!(c, ',' | ' ' | '_'))
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Parse(format!("unexpected {other:?} in phase vector {text:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits, kind)
    }

    /// `β_ℓ = α_ℓ − α_{ℓ−r}` reduced mod 2, for `ℓ < len`, with `α` zero outside its support.
    /// The result is a valid beta vector whenever `r ≥ 1` and `len ≥ T + r`.
    pub fn shifted_difference(alpha: &PhaseVector, r: usize, len: usize) -> Result<Self> {
        let at = |j: Option<usize>| j.and_then(|j| alpha.bits.get(j)).copied().unwrap_or(0);
        let bits = (0..len).map(|l| at(Some(l)) ^ at(l.checked_sub(r))).collect();
        Self::new(bits, PhaseKind::Beta)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn kind(&self) -> PhaseKind {
        self.kind
    }
}

impl fmt::Display for PhaseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for PhaseVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Nondecreasing offsets `i` with `i₀ = 0` and unit-or-zero steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CorrectionVector(Vec<u64>);

impl CorrectionVector {
    pub fn new(entries: Vec<u64>) -> Result<Self> {
        match entries.first() {
            None => return Err(Error::Invalid("correction vector must be nonempty".into())),
            Some(&first) if first != 0 => {
                return Err(Error::Invalid("correction vector must start with 0".into()))
            }
            _ => {}
        }
        if entries.windows(2).any(|w| w[1] < w[0] || w[1] - w[0] > 1) {
            return Err(Error::Invalid(format!("correction steps must be 0 or 1: {entries:?}")));
        }
        Ok(CorrectionVector(entries))
    }

    pub fn zeros(len: usize) -> Self {
        CorrectionVector(vec![0; len.max(1)])
    }

    /// Parses `0,1,1` or `(0,1,1)`.
    pub fn parse(text: &str) -> Result<Self> {
        let body = text.trim();
        let body = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).unwrap_or(body);
        if body.len() > 4096 {
            return Err(Error::Parse("correction vector too long".into()));
        }
        let entries = body
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad correction entry {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_lengths(i: &CorrectionVector, beta: &PhaseVector) -> Result<()> {
    if i.len() != beta.len() {
        return Err(Error::LengthMismatch {
            expected: beta.len(),
            found: i.len(),
        });
    }
    Ok(())
}

fn check_lambda(lambda: u32) -> Result<()> {
    if lambda > LAMBDA_CAP {
        return Err(Error::CostGuard { lambda, cap: LAMBDA_CAP });
    }
    Ok(())
}

/// `Σ_ℓ β_ℓ s_λ(u + ℓd + i_ℓ)`.
#[inline]
fn digit_phase(lambda: u32, u: u64, i: &[u64], beta: &[u8], d: u64) -> u64 {
    let mut total = 0;
    for (l, (&b, &off)) in beta.iter().zip(i).enumerate() {
        if b == 1 {
            let arg = u.wrapping_add((l as u64).wrapping_mul(d)).wrapping_add(off);
            total += truncated_sum_of_digits(arg, lambda);
        }
    }
    total
}

/// `2^λ · G(0, d)`, an exact integer.
pub fn coefficient_sum(lambda: u32, i: &CorrectionVector, beta: &PhaseVector, d: u64) -> Result<i64> {
    check_lengths(i, beta)?;
    check_lambda(lambda)?;
    Ok(coefficient_sum_unchecked(lambda, i.entries(), beta.bits(), d))
}

fn coefficient_sum_unchecked(lambda: u32, i: &[u64], beta: &[u8], d: u64) -> i64 {
    (0..1u64 << lambda)
        .map(|u| if digit_phase(lambda, u, i, beta, d) & 1 == 0 { 1 } else { -1 })
        .sum()
}

/// `G_λ^{i,β}(h, d)`.
pub fn fourier_coefficient(
    lambda: u32,
    i: &CorrectionVector,
    beta: &PhaseVector,
    h: i64,
    d: u64,
) -> Result<Complex64> {
    check_lengths(i, beta)?;
    check_lambda(lambda)?;
    Ok(coefficient_unchecked(lambda, i.entries(), beta.bits(), h, d))
}

fn coefficient_unchecked(lambda: u32, i: &[u64], beta: &[u8], h: i64, d: u64) -> Complex64 {
    let size = 1u64 << lambda;
    if h == 0 {
        let s = coefficient_sum_unchecked(lambda, i, beta, d);
        return Complex64::new(s as f64 / size as f64, 0.0);
    }
    // phase = (k 2^λ − 2 h u) / 2^{λ+1}
    let modulus = 2 * i128::from(size);
    let mut acc = Complex64::new(0.0, 0.0);
    for u in 0..size {
        let k = i128::from(digit_phase(lambda, u, i, beta, d));
        let num = (k * i128::from(size) - 2 * i128::from(h) * i128::from(u)).rem_euclid(modulus);
        let angle = TAU * num as f64 / modulus as f64;
        acc += Complex64::new(angle.cos(), angle.sin());
    }
    acc / size as f64
}

/// Parameters of a second-moment evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierSpec {
    pub lambda: u32,
    pub lambda_prime: u32,
    pub i: CorrectionVector,
    pub beta: PhaseVector,
    pub h: i64,
}

impl FourierSpec {
    pub fn new(lambda: u32, lambda_prime: u32, i: CorrectionVector, beta: PhaseVector, h: i64) -> Result<Self> {
        check_lengths(&i, &beta)?;
        check_lambda(lambda)?;
        if beta.kind() != PhaseKind::Beta {
            return Err(Error::Invalid("second moments take a beta vector".into()));
        }
        if lambda_prime > lambda || 2 * lambda_prime < lambda {
            return Err(Error::Invalid(format!(
                "need lambda/2 <= lambda' <= lambda, got lambda = {lambda}, lambda' = {lambda_prime}"
            )));
        }
        Ok(FourierSpec {
            lambda,
            lambda_prime,
            i,
            beta,
            h,
        })
    }
}

/// Exact second moment for `h = 0`: `Σ_d S_d²` over `d < 2^{λ'}` and the
/// base-2 log of its denominator `2^{λ' + 2λ}`.
pub fn second_moment_exact(params: &FourierSpec) -> Option<(u128, u32)> {
    if params.h != 0 {
        return None;
    }
    let (i, beta) = (params.i.entries(), params.beta.bits());
    let numerator: u128 = (0..1u64 << params.lambda_prime)
        .into_par_iter()
        .map(|d| {
            let s = coefficient_sum_unchecked(params.lambda, i, beta, d);
            (s.unsigned_abs() as u128).pow(2)
        })
        .sum();
    Some((numerator, params.lambda_prime + 2 * params.lambda))
}

/// `2^{-λ'} Σ_{d < 2^{λ'}} |G_λ^{i,β}(h, d)|²`.
pub fn fourier_second_moment(params: &FourierSpec) -> f64 {
    if let Some((num, log_den)) = second_moment_exact(params) {
        return num as f64 / 2f64.powi(log_den as i32);
    }
    let (i, beta) = (params.i.entries(), params.beta.bits());
    let terms: Vec<f64> = (0..1u64 << params.lambda_prime)
        .into_par_iter()
        .map(|d| coefficient_unchecked(params.lambda, i, beta, params.h, d).norm_sqr())
        .collect();
    terms.iter().sum::<f64>() / 2f64.powi(params.lambda_prime as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub lambda: u32,
    pub lambda_prime: u32,
    pub moment: f64,
}

/// Second moments over a list of `λ` and the fit `log₂ m = log₂ c₀ − η λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub fitted_eta: f64,
    pub fitted_c0: f64,
    /// Fewer than two rows with a positive moment; the fit is not determined.
    pub degenerate: bool,
}

/// Moments at each `λ` with `λ' = ⌈λ/2⌉`, and a least-squares decay fit.
pub fn estimate_decay_exponent(
    i: &CorrectionVector,
    beta: &PhaseVector,
    h: i64,
    lambdas: &[u32],
) -> Result<DecayTable> {
    if lambdas.is_empty() {
        return Err(Error::Invalid("lambda list must be nonempty".into()));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("lambda list must be strictly increasing".into()));
    }
    if let Some(&bad) = lambdas.iter().find(|&&l| l > LAMBDA_CAP) {
        return Err(Error::CostGuard { lambda: bad, cap: LAMBDA_CAP });
    }
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let params = FourierSpec::new(lambda, lambda.div_ceil(2), i.clone(), beta.clone(), h)?;
            Ok(DecayRow {
                lambda,
                lambda_prime: params.lambda_prime,
                moment: fourier_second_moment(&params),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.moment > 0.0)
        .map(|r| (f64::from(r.lambda), r.moment.log2()))
        .collect();
    let (fitted_eta, fitted_c0, degenerate) = if pts.len() < 2 {
        let c0 = pts.first().map_or(0.0, |p| 2f64.powf(p.1 + 0.0));
        (0.0, c0, true)
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let slope = sxy / sxx;
        (-slope, 2f64.powf(my - slope * mx), false)
    };
    Ok(DecayTable {
        rows,
        fitted_eta,
        fitted_c0,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn beta(bits: &[u8]) -> PhaseVector {
        PhaseVector::beta(bits).unwrap()
    }

    fn corr(v: &[u64]) -> CorrectionVector {
        CorrectionVector::new(v.to_vec()).unwrap()
    }

    /// Direct evaluation of the defining sum in complex floating point.
    fn oracle(lambda: u32, i: &[u64], b: &[u8], h: i64, d: u64) -> Complex64 {
        let size = 1u64 << lambda;
        let mut acc = Complex64::new(0.0, 0.0);
        for u in 0..size {
            let mut x = 0.0;
            for l in 0..b.len() {
                let arg = (u + l as u64 * d + i[l]) % size;
                x += 0.5 * f64::from(b[l]) * arg.count_ones() as f64;
            }
            x -= h as f64 * u as f64 / size as f64;
            acc += Complex64::from_polar(1.0, TAU * x);
        }
        acc / size as f64
    }

    #[test]
    fn coefficient_examples() {
        let g = fourier_coefficient(0, &corr(&[0, 1]), &beta(&[1, 1]), 0, 0).unwrap();
        assert_eq!(g, Complex64::new(1.0, 0.0));
        let g = fourier_coefficient(1, &corr(&[0, 1]), &beta(&[1, 1]), 0, 0).unwrap();
        assert_eq!(g, Complex64::new(-1.0, 0.0));
        let g = fourier_coefficient(2, &corr(&[0, 0]), &beta(&[1, 1]), 0, 1).unwrap();
        assert_eq!(g, Complex64::new(0.0, 0.0));
        assert_eq!(coefficient_sum(2, &corr(&[0, 0]), &beta(&[1, 1]), 0).unwrap(), 4);
    }

    #[test]
    fn errors() {
        assert_eq!(
            fourier_coefficient(3, &corr(&[0, 0, 1]), &beta(&[1, 1]), 0, 0),
            Err(Error::LengthMismatch { expected: 2, found: 3 })
        );
        assert!(matches!(
            fourier_coefficient(25, &corr(&[0, 0]), &beta(&[1, 1]), 0, 0),
            Err(Error::CostGuard { lambda: 25, cap: 24 })
        ));
        assert!(PhaseVector::beta(&[1, 0]).is_err());
        assert!(PhaseVector::alpha(&[0, 1]).is_err());
        assert!(PhaseVector::alpha(&[]).is_err());
        assert!(CorrectionVector::new(vec![0, 2]).is_err());
        assert!(CorrectionVector::new(vec![1]).is_err());
        assert!(FourierSpec::new(8, 3, corr(&[0, 0]), beta(&[1, 1]), 0).is_err());
        assert!(FourierSpec::new(8, 9, corr(&[0, 0]), beta(&[1, 1]), 0).is_err());
        assert!(FourierSpec::new(8, 4, corr(&[0, 0]), PhaseVector::alpha(&[1, 1]).unwrap(), 0).is_err());
    }

    #[test]
    fn parse_vectors() {
        assert_eq!(PhaseVector::parse("(1,0,1)", PhaseKind::Beta).unwrap().bits(), &[1, 0, 1]);
        assert_eq!(PhaseVector::parse("1101", PhaseKind::Alpha).unwrap().to_string(), "1101");
        assert!(PhaseVector::parse("12", PhaseKind::Alpha).is_err());
        assert_eq!(CorrectionVector::parse("(0,1,1)").unwrap().entries(), &[0, 1, 1]);
        assert!(CorrectionVector::parse("0,x").is_err());
    }

    #[test]
    fn shifted_difference_is_a_beta_vector() {
        for bits in [vec![1u8], vec![1, 0, 1], vec![1, 1], vec![1, 1, 0, 1]] {
            let alpha = PhaseVector::alpha(&bits).unwrap();
            for r in 1..6 {
                let b = PhaseVector::shifted_difference(&alpha, r, bits.len() + r).unwrap();
                assert_eq!(b.bits()[0], 1);
            }
        }
    }

    #[test]
    fn moment_examples() {
        let params = FourierSpec::new(0, 0, corr(&[0, 0]), beta(&[1, 1]), 0).unwrap();
        assert_eq!(fourier_second_moment(&params), 1.0);
        let params = FourierSpec::new(2, 1, corr(&[0, 0]), beta(&[1, 1]), 0).unwrap();
        assert_eq!(fourier_second_moment(&params), 0.5);
        let params = FourierSpec::new(8, 4, corr(&[0, 0]), beta(&[1, 1]), 0).unwrap();
        let m8 = fourier_second_moment(&params);
        let direct: f64 = (0..16).map(|d| oracle(8, &[0, 0], &[1, 1], 0, d).norm_sqr()).sum::<f64>() / 16.0;
        assert!((m8 - direct).abs() < 1e-12);
        assert!(m8 > 0.0 && m8 < 0.5);
    }

    #[test]
    fn matches_oracle_with_frequency() {
        for &(lambda, h, d) in &[(3u32, 1i64, 0u64), (5, 7, 3), (6, -5, 11), (4, 16, 2)] {
            let g = fourier_coefficient(lambda, &corr(&[0, 1, 1]), &beta(&[1, 0, 1]), h, d).unwrap();
            let o = oracle(lambda, &[0, 1, 1], &[1, 0, 1], h, d);
            assert!((g - o).norm() < 1e-12, "{lambda} {h} {d}: {g} vs {o}");
        }
    }

    #[test]
    fn parseval() {
        for lambda in 0..=8u32 {
            for d in [0u64, 1, 5] {
                let total: f64 = (0..1i64 << lambda)
                    .map(|h| fourier_coefficient(lambda, &corr(&[0, 1]), &beta(&[1, 1]), h, d).unwrap().norm_sqr())
                    .sum();
                assert!((total - 1.0).abs() < 1e-10, "lambda {lambda} d {d}: {total}");
            }
        }
    }

    #[test]
    fn decay_fit() {
        let t = estimate_decay_exponent(&corr(&[0, 0]), &beta(&[1, 1]), 0, &[4, 6, 8, 10, 12, 14]).unwrap();
        assert!(!t.degenerate);
        assert!(t.fitted_eta > 0.0, "{t:?}");
        assert!(t.rows.last().unwrap().moment < t.rows[0].moment);

        let t = estimate_decay_exponent(&corr(&[0, 0, 0]), &beta(&[1, 0, 1]), 0, &[4, 5, 6, 7, 8, 9, 10, 11, 12]).unwrap();
        assert!(t.fitted_eta > 0.0, "{t:?}");

        let t = estimate_decay_exponent(&corr(&[0, 0]), &beta(&[1, 1]), 0, &[6]).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.fitted_eta, 0.0);

        assert!(matches!(
            estimate_decay_exponent(&corr(&[0, 0]), &beta(&[1, 1]), 0, &[4, 30]),
            Err(Error::CostGuard { lambda: 30, .. })
        ));
        assert!(estimate_decay_exponent(&corr(&[0, 0]), &beta(&[1, 1]), 0, &[]).is_err());
        assert!(estimate_decay_exponent(&corr(&[0, 0]), &beta(&[1, 1]), 0, &[6, 4]).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_periodic(lambda in 0u32..9, h in -300i64..300, d in 0u64..1000, steps in proptest::collection::vec(0u64..2, 1..4)) {
            let mut entries = vec![0u64];
            for s in &steps {
                let last = *entries.last().unwrap();
                entries.push(last + s);
            }
            let mut bits = vec![1u8; entries.len()];
            if bits.len() % 2 == 1 {
                *bits.last_mut().unwrap() = 0;
            }
            let (i, b) = (corr(&entries), PhaseVector::beta(&bits).unwrap());
            let g = fourier_coefficient(lambda, &i, &b, h, d).unwrap();
            prop_assert!(g.norm() <= 1.0 + 1e-12);
            let shifted = fourier_coefficient(lambda, &i, &b, h, d + (1 << lambda)).unwrap();
            prop_assert!((g - shifted).norm() < 1e-12);
            if h == 0 {
                let s = coefficient_sum(lambda, &i, &b, d).unwrap();
                prop_assert_eq!(g.re, s as f64 / (1u64 << lambda) as f64);
                prop_assert_eq!(g.im, 0.0);
            }
        }
    }
}
