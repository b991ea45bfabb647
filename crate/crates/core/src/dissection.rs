//! Dissection of a dyadic range into cells on which the floors are affine.
//!
//! For `k` and block length `L ≥ 2`, `J(k, L, M)` is the set of `n` with
//! `k/(LM) ≤ f'(n)` and `f'(n+L−1) < (k+1)/(LM)`. If additionally
//! `{f(n)} ∈ [m/M, (m+1)/M)` with `m` good, then for every `ℓ < L`
//!
//! ```text
//! ⌊f(n+ℓ)⌋ = ⌊f(n)⌋ + ℓ⌊k/(LM)⌋ + i_ℓ
//! ```
//!
//! Goodness and the corrections `i_ℓ` are decided in integer arithmetic over
//! the common denominator `LM`.

use rayon::prelude::*;
use serde::Serialize;

use crate::digits::BinaryDigits;
use crate::error::{Error, Result};
use crate::expsum::{weighted_parity_sum, SumResult};
use crate::fourier::{self, CorrectionVector, PhaseKind, PhaseVector, LAMBDA_CAP};
use crate::indexfn::IndexMap;
use crate::par;

/// Search limit for the bisection on `f'`.
const SEARCH_CAP: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RangeAnchors {
    #[serde(rename = "A")]
    pub a: u64,
    /// `⌊f'(A)⌋ + 1`.
    pub d0: u64,
    /// `⌊f'(2A)⌋`.
    pub d1: u64,
    /// `2^{λ'−1} < d1 ≤ 2^{λ'}`.
    pub lambda_prime: u32,
}

impl RangeAnchors {
    /// `d0 > d1`: no integer slope lies in `(f'(A), f'(2A)]`.
    pub fn is_degenerate(&self) -> bool {
        self.d0 > self.d1
    }
}

pub fn range_anchors<F: IndexMap + ?Sized>(f: &F, a: u64) -> Result<RangeAnchors> {
    if a == 0 {
        return Err(Error::Invalid("A must be positive".into()));
    }
    let two_a = par::offset(a, a, "2A")?;
    par::check_start(f, a)?;
    let d0 = f.derivative(a as f64).floor() as u64 + 1;
    let d1 = f.derivative(two_a as f64).floor() as u64;
    let lambda_prime = if d1 <= 1 { 0 } else { 64 - (d1 - 1).leading_zeros() };
    Ok(RangeAnchors {
        a,
        d0,
        d1,
        lambda_prime,
    })
}

/// Half-open integer interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct IntegerInterval {
    pub start: u64,
    pub end: u64,
}

impl IntegerInterval {
    pub fn new(start: u64, end: u64) -> Self {
        IntegerInterval { start, end: end.max(start) }
    }

    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, n: u64) -> bool {
        (self.start..self.end).contains(&n)
    }

    pub fn intersect(&self, other: &IntegerInterval) -> IntegerInterval {
        IntegerInterval::new(self.start.max(other.start), self.end.min(other.end))
    }
}

fn block_modulus(l: u64, m: u64) -> Result<u64> {
    if l == 0 || m == 0 {
        return Err(Error::Invalid("L and M must be positive".into()));
    }
    l.checked_mul(m).ok_or_else(|| Error::Overflow("L*M".into()))
}

/// Smallest `n ≥ first_index` with `f'(n)·D ≥ target`.
fn first_slope_at_least<F: IndexMap + ?Sized>(f: &F, target: u64, denom: u64) -> Result<u64> {
    let reached = |n: u64| f.derivative(n as f64) * denom as f64 >= target as f64;
    let mut lo = f.first_index();
    if reached(lo) {
        return Ok(lo);
    }
    let mut hi = lo.max(1);
    while !reached(hi) {
        lo = hi;
        hi = hi.checked_mul(2).filter(|&h| h <= SEARCH_CAP).ok_or_else(|| {
            Error::Domain(format!("f' never reaches {target}/{denom} below 2^62"))
        })?;
    }
    // reached(hi) and !reached(lo)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `J(k, L, M)`, found by bisection on the increasing `f'`.
pub fn interval_j<F: IndexMap + ?Sized>(f: &F, k: u64, l: u64, m: u64) -> Result<IntegerInterval> {
    if l < 2 {
        return Err(Error::Invalid(format!("L must be at least 2, got {l}")));
    }
    let lm = block_modulus(l, m)?;
    let start = first_slope_at_least(f, k, lm)?;
    let next = first_slope_at_least(f, par::offset(k, 1, "k + 1")?, lm)?;
    Ok(IntegerInterval::new(start, (next + 1).saturating_sub(l)))
}

/// Whether `[(mL + ℓk)/D, ((m+1)L + ℓ(k+1))/D)` avoids the integers for all `ℓ < L`, `D = LM`.
fn is_good(k: u64, m: u64, l: u64, d: u64) -> bool {
    let (k, m, l, d) = (u128::from(k), u128::from(m), u128::from(l), u128::from(d));
    (0..l).all(|ell| {
        let lo = m * l + ell * k;
        let hi = (m + 1) * l + ell * (k + 1);
        lo.div_ceil(d) * d >= hi
    })
}

/// All good `m ∈ [0, M)` for `(k, L, M)`.
pub fn good_set(k: u64, l: u64, m: u64) -> Result<Vec<u64>> {
    let d = block_modulus(l, m)?;
    Ok((0..m).filter(|&r| is_good(k, r, l, d)).collect())
}

/// `i_ℓ = ⌊(mL + ℓk)/(LM)⌋ − ℓ⌊k/(LM)⌋` for `ℓ < L`.
pub fn correction_terms(k: u64, m: u64, l: u64, big_m: u64) -> Result<CorrectionVector> {
    let d = u128::from(block_modulus(l, big_m)?);
    if m >= big_m {
        return Err(Error::Invalid(format!("m = {m} must be below M = {big_m}")));
    }
    let (k, m, l) = (u128::from(k), u128::from(m), u128::from(l));
    let entries = (0..l)
        .map(|ell| ((m * l + ell * k) / d - ell * (k / d)) as u64)
        .collect();
    CorrectionVector::new(entries)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DissectionCell {
    pub k: u64,
    pub m: u64,
    #[serde(rename = "L")]
    pub big_l: u64,
    #[serde(rename = "M")]
    pub big_m: u64,
    pub interval: IntegerInterval,
    pub corrections: CorrectionVector,
    pub good: bool,
}

impl DissectionCell {
    pub fn new<F: IndexMap + ?Sized>(f: &F, k: u64, m: u64, l: u64, big_m: u64) -> Result<Self> {
        let interval = interval_j(f, k, l, big_m)?;
        Self::with_interval(k, m, l, big_m, interval)
    }

    fn with_interval(k: u64, m: u64, l: u64, big_m: u64, interval: IntegerInterval) -> Result<Self> {
        let corrections = correction_terms(k, m, l, big_m)?;
        Ok(DissectionCell {
            k,
            m,
            big_l: l,
            big_m,
            interval,
            corrections,
            good: is_good(k, m, l, l * big_m),
        })
    }

    /// The same cell with the last correction step flipped between 0 and 1.
    /// Used as a negative control for the decomposition check.
    pub fn corrupted(&self) -> DissectionCell {
        let mut entries = self.corrections.entries().to_vec();
        let n = entries.len();
        if n >= 2 {
            let step = entries[n - 1] - entries[n - 2];
            entries[n - 1] = entries[n - 2] + (1 - step);
        }
        DissectionCell {
            corrections: CorrectionVector::new(entries).expect("flipped step stays in {0, 1}"),
            ..self.clone()
        }
    }
}

/// All cells `(k, m)` with `k ∈ [d0·LM, d1·LM)` and `m < M`, their intervals clipped to `(A, 2A]`.
pub fn dissect<F: IndexMap + ?Sized>(f: &F, a: u64, l: u64, big_m: u64) -> Result<(RangeAnchors, Vec<DissectionCell>)> {
    let anchors = range_anchors(f, a)?;
    let lm = block_modulus(l, big_m)?;
    if l < 2 {
        return Err(Error::Invalid(format!("L must be at least 2, got {l}")));
    }
    let range = IntegerInterval::new(a + 1, 2 * a + 1);
    let k_lo = anchors.d0.saturating_mul(lm);
    let k_hi = anchors.d1.saturating_mul(lm).max(k_lo);
    let intervals = (k_lo..k_hi)
        .into_par_iter()
        .map(|k| Ok((k, interval_j(f, k, l, big_m)?.intersect(&range))))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(intervals.len() * big_m as usize);
    for (k, interval) in intervals {
        for m in 0..big_m {
            cells.push(DissectionCell::with_interval(k, m, l, big_m, interval)?);
        }
    }
    Ok((anchors, cells))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FloorViolation {
    pub n: u64,
    pub ell: u64,
    pub expected: u128,
    pub actual: u128,
}

/// Checks the affine floor identity at every `n` of a good cell whose
/// fractional part falls in bin `m`.
pub fn verify_floor_decomposition<F: IndexMap + ?Sized>(f: &F, cell: &DissectionCell) -> Result<Vec<FloorViolation>> {
    if !cell.good {
        return Err(Error::Invalid(format!("cell (k = {}, m = {}) is not good", cell.k, cell.m)));
    }
    let (l, big_m) = (cell.big_l, cell.big_m);
    if cell.corrections.len() as u64 != l {
        return Err(Error::LengthMismatch {
            expected: l as usize,
            found: cell.corrections.len(),
        });
    }
    let step = u128::from(cell.k / (l * big_m));
    let i = cell.corrections.entries();
    let found = par::map_chunks(cell.interval.start, cell.interval.end, |lo, hi| {
        let mut out = Vec::new();
        for n in lo..hi {
            let scaled = f.scaled_floor(n, big_m)?;
            if (scaled % u128::from(big_m)) as u64 != cell.m {
                continue;
            }
            let base = scaled / u128::from(big_m);
            for ell in 0..l {
                let expected = base + u128::from(ell) * step + u128::from(i[ell as usize]);
                let actual = f.floor(n + ell)?;
                if actual != expected {
                    out.push(FloorViolation { n, ell, expected, actual });
                }
            }
        }
        Ok(out)
    })?;
    Ok(found.into_iter().flatten().collect())
}

/// `S₁ = Σ_{A<n≤2A} e(½ Σ_ℓ β_ℓ s_λ(⌊f(n+ℓ)⌋))`.
pub fn exp_sum_s1<F: IndexMap + ?Sized>(f: &F, a: u64, beta: &PhaseVector, lambda: u32) -> Result<SumResult> {
    if beta.kind() != PhaseKind::Beta {
        return Err(Error::Invalid("S1 takes a beta vector".into()));
    }
    if a == 0 {
        return Err(Error::Invalid("A must be positive".into()));
    }
    par::offset(a, a, "2A")?;
    par::check_start(f, a + 1)?;
    let value = weighted_parity_sum(f, a + 1, 2 * a + 1, beta.bits(), |x| x.truncated_digit_sum(lambda))?;
    Ok(SumResult {
        value,
        normalized: value.unsigned_abs() as f64 / a as f64,
        range: (a, 2 * a),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct S3Report {
    pub anchors: RangeAnchors,
    /// `Σ_{d0·LM ≤ k < d1·LM} |G_λ(0, ⌊k/(LM)⌋)|`.
    pub value: f64,
    /// `LM · Σ_{d < 2^{λ'}} |G_λ(0, d)|`.
    pub majorant: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn exp_sum_s3<F: IndexMap + ?Sized>(
    f: &F,
    a: u64,
    l: u64,
    big_m: u64,
    i: &CorrectionVector,
    beta: &PhaseVector,
    lambda: u32,
) -> Result<S3Report> {
    if lambda > LAMBDA_CAP {
        return Err(Error::CostGuard { lambda, cap: LAMBDA_CAP });
    }
    if l < 2 {
        return Err(Error::Invalid(format!("L must be at least 2, got {l}")));
    }
    let lm = block_modulus(l, big_m)?;
    let anchors = range_anchors(f, a)?;
    if anchors.lambda_prime > LAMBDA_CAP {
        return Err(Error::CostGuard {
            lambda: anchors.lambda_prime,
            cap: LAMBDA_CAP,
        });
    }
    // Each d is hit by exactly LM values of k.
    let abs_sums = (0..1u64 << anchors.lambda_prime)
        .into_par_iter()
        .map(|d| Ok(fourier::coefficient_sum(lambda, i, beta, d)?.unsigned_abs()))
        .collect::<Result<Vec<u64>>>()?;
    let scale = lm as f64 / 2f64.powi(lambda as i32);
    let inside: u64 = abs_sums
        .iter()
        .enumerate()
        .filter(|&(d, _)| (anchors.d0..anchors.d1).contains(&(d as u64)))
        .map(|(_, s)| s)
        .sum();
    let total: u64 = abs_sums.iter().sum();
    Ok(S3Report {
        anchors,
        value: inside as f64 * scale,
        majorant: total as f64 * scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub count: u64,
    /// `|J| / (KM)`.
    pub main_term: f64,
    pub abs_error: f64,
}

/// `#{n ∈ J : {f(n)} ∈ [m/M, (m+1)/M), ⌊f(n)⌋ ≡ s mod K}` by direct scan.
pub fn discrepancy_count<F: IndexMap + ?Sized>(
    f: &F,
    j: IntegerInterval,
    big_m: u64,
    m: u64,
    modulus: u64,
    s: u64,
) -> Result<DiscrepancyReport> {
    if big_m == 0 || modulus == 0 {
        return Err(Error::Invalid("M and K must be positive".into()));
    }
    if m >= big_m || s >= modulus {
        return Err(Error::Invalid(format!("need m < M and s < K, got m = {m}, s = {s}")));
    }
    if !j.is_empty() {
        par::check_start(f, j.start)?;
    }
    let count: u64 = par::map_chunks(j.start, j.end, |lo, hi| {
        let mut hits = 0u64;
        for n in lo..hi {
            let scaled = f.scaled_floor(n, big_m)?;
            let (fl, bin) = (scaled / u128::from(big_m), (scaled % u128::from(big_m)) as u64);
            if bin == m && fl % u128::from(modulus) == u128::from(s) {
                hits += 1;
            }
        }
        Ok(hits)
    })?
    .into_iter()
    .sum();
    let main_term = j.len() as f64 / (modulus as f64 * big_m as f64);
    Ok(DiscrepancyReport {
        count,
        main_term,
        abs_error: (count as f64 - main_term).abs(),
    })
}

/// `N/(KLM) + N(ΛLM)^{1/2} + (ΛLM)^{−1/2}`, the error terms of the
/// fractional-part count with its implied constant set to 1.
pub fn discrepancy_envelope(n: u64, modulus: u64, l: u64, big_m: u64, curvature: f64) -> f64 {
    let (n, lm) = (n as f64, l as f64 * big_m as f64);
    let x = curvature * lm;
    n / (modulus as f64 * lm) + n * x.sqrt() + 1.0 / x.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterPlan {
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub r: u64,
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub lambda: u32,
    /// `2^{λ/2} ≤ ⌊f'(2A)⌋ ≤ 2^λ`.
    pub condition_met: bool,
}

pub fn parameter_plan<F: IndexMap + ?Sized>(f: &F, a: u64, t: u64, epsilon: f64) -> Result<ParameterPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if t == 0 {
        return Err(Error::Invalid("T must be positive".into()));
    }
    if a == 0 {
        return Err(Error::Invalid("A must be positive".into()));
    }
    let two_a = par::offset(a, a, "2A")?;
    par::check_start(f, a)?;

    let mut r = ((1.0 / epsilon).floor() as u64).saturating_sub(1).max(2);
    while 1.0 / r as f64 >= epsilon {
        r += 1;
    }
    let l = r + t - 1;
    let m = r.checked_mul(l).ok_or_else(|| Error::Overflow("M = R L".into()))?;
    let slope = f.derivative(two_a as f64);
    let mut lambda = 0u32;
    while l as f64 * slope > epsilon * 2f64.powi(lambda as i32) {
        lambda += 1;
    }
    let d1 = slope.floor() as u128;
    let condition_met = lambda < 128 && 1u128 << lambda <= d1 * d1 && d1 <= 1u128 << lambda;
    Ok(ParameterPlan {
        epsilon,
        r,
        t,
        l,
        m,
        lambda,
        condition_met,
    })
}
