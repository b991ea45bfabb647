//! Finite checks of the growth hypotheses on `f` and of the derivative
//! inequalities they imply.
//!
//! Positivity and the doubling bound on `f''` are checked pointwise. The two
//! asymptotic bounds (an upper bound `f'' ≪ x^{-2/3}/log x` and the lower
//! bounds `f'' ≫ log^k(x)/x`) cannot be decided on a finite range; they are
//! replaced by a trend test on the tail of a log-spaced sample and the verdict
//! is labelled empirical.

use serde::Serialize;

use super::{Derivatives, IndexFunction};
use crate::error::{Error, Result};

const SAMPLES: usize = 200;
const SLOPE_TOL: f64 = 1e-9;
const REL_SLACK: f64 = 1e-10;

/// Trend of `log g` over log-spaced samples of `g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecileTrend {
    /// Mean of `log g` over the first decile of samples.
    pub first_decile_mean: f64,
    /// Mean of `log g` over the last decile of samples.
    pub last_decile_mean: f64,
    /// Least-squares slope of `log g` against `log x` over the last decile.
    pub tail_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBoundCheck {
    /// `k` for the lower bounds; absent for the upper bound.
    pub k: Option<u32>,
    pub pass: bool,
    /// Fitted constant: max of `g` for the upper bound, min for the lower bounds.
    pub fitted_constant: f64,
    pub trend: DecileTrend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub x_range: (f64, f64),
    pub samples: usize,
    /// `f, f', f'' > 0` at every sample.
    pub positivity: bool,
    /// `f''(x)/2 ≤ f''(y) ≤ f''(x)` at every sampled pair `x ≤ y ≤ 2x`.
    pub doubling: bool,
    pub doubling_violations: usize,
    /// `f''(x) x^{2/3} log x` has a non-increasing tail.
    pub upper_bound: PowerBoundCheck,
    /// `f''(x) x log^{-k} x` has a non-decreasing tail, for each `k ≤ k_max`.
    pub lower_bounds: Vec<PowerBoundCheck>,
    /// Always true: the bound checks are finite-range proxies.
    pub empirical: bool,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.positivity
            && self.doubling
            && self.upper_bound.pass
            && self.lower_bounds.iter().all(|c| c.pass)
    }
}

fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp())
        .collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn trend(xs: &[f64], g: &[f64]) -> DecileTrend {
    let decile = (xs.len() / 10).max(2);
    let logx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let logg: Vec<f64> = g.iter().map(|v| v.ln()).collect();
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let tail = xs.len() - decile;
    DecileTrend {
        first_decile_mean: mean(&logg[..decile]),
        last_decile_mean: mean(&logg[tail..]),
        tail_slope: slope(&logx[tail..], &logg[tail..]),
    }
}

/// Checks the four growth hypotheses on `[lo, hi]` for `k = 0..=k_max`.
pub fn check_hypotheses(f: &IndexFunction, x_range: (f64, f64), k_max: u32) -> Result<HypothesisReport> {
    let (lo, hi) = x_range;
    if lo.is_nan() || lo < f.x0() as f64 || !hi.is_finite() || hi <= lo {
        return Err(Error::Domain(format!(
            "x range [{lo}, {hi}] must satisfy x0 = {} <= lo < hi",
            f.x0()
        )));
    }
    let xs = log_spaced(lo, hi, SAMPLES);
    let ds: Vec<Derivatives> = xs.iter().map(|&x| f.derivatives_unchecked(x)).collect();

    let positivity = ds.iter().all(|d| d.value > 0.0 && d.first > 0.0 && d.second > 0.0);

    let mut doubling_violations = 0;
    for (j, &x) in xs.iter().enumerate() {
        let base = ds[j].second;
        let partners = xs[j..]
            .iter()
            .zip(&ds[j..])
            .take_while(|(y, _)| **y <= 2.0 * x)
            .map(|(_, d)| d.second)
            .chain(std::iter::once(f.derivatives_unchecked(2.0 * x).second));
        for y in partners {
            let ok = y <= base * (1.0 + REL_SLACK) && y >= 0.5 * base * (1.0 - REL_SLACK);
            if !ok {
                doubling_violations += 1;
            }
        }
    }

    let upper_g: Vec<f64> = xs
        .iter()
        .zip(&ds)
        .map(|(x, d)| d.second * x.powf(2.0 / 3.0) * x.ln())
        .collect();
    let upper_trend = trend(&xs, &upper_g);
    let finite_positive = |g: &[f64]| g.iter().all(|v| v.is_finite() && *v > 0.0);
    let upper_bound = PowerBoundCheck {
        k: None,
        pass: finite_positive(&upper_g) && upper_trend.tail_slope <= SLOPE_TOL,
        fitted_constant: upper_g.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        trend: upper_trend,
    };

    let lower_bounds = (0..=k_max)
        .map(|k| {
            let g: Vec<f64> = xs
                .iter()
                .zip(&ds)
                .map(|(x, d)| d.second * x * x.ln().powi(-(k as i32)))
                .collect();
            let t = trend(&xs, &g);
            PowerBoundCheck {
                k: Some(k),
                pass: finite_positive(&g) && t.tail_slope >= -SLOPE_TOL,
                fitted_constant: g.iter().cloned().fold(f64::INFINITY, f64::min),
                trend: t,
            }
        })
        .collect();

    Ok(HypothesisReport {
        x_range,
        samples: SAMPLES,
        positivity,
        doubling: doubling_violations == 0,
        doubling_violations,
        upper_bound,
        lower_bounds,
        empirical: true,
    })
}

/// Which derivative inequality a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeInequality {
    /// `x f''(x) ≤ 2 y f''(y)` for `x0 ≤ x ≤ y`.
    AlmostMonotone,
    /// `x f''(x) ≤ 2 f'(x)` for `x ≥ 2 x0`.
    SlopeBound,
    /// `f'(x) - f'(x0) ≤ 2 x f''(x) log x` for `x ≥ x0`.
    LogGrowth,
    /// `f'(y) ≤ 3 f'(x)` for `2 x0 ≤ x ≤ y ≤ 2x`.
    DoublingQuotient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityViolation {
    pub inequality: DerivativeInequality,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct InequalityReport {
    /// Instances checked, in the order almost-monotone, slope, log-growth, doubling-quotient.
    pub checked: [usize; 4],
    pub violations: Vec<InequalityViolation>,
}

/// Evaluates every derivative inequality whose side conditions a pair meets.
///
/// Each pair must satisfy `x0 ≤ x ≤ y`; the remaining inequalities are applied
/// when their stricter conditions hold.
pub fn check_derivative_inequalities(f: &IndexFunction, samples: &[(f64, f64)]) -> Result<InequalityReport> {
    let x0 = f.x0() as f64;
    let fp_x0 = f.derivatives_unchecked(x0).first;
    let mut report = InequalityReport::default();
    for &(x, y) in samples {
        if !(x >= x0 && y >= x && y.is_finite()) {
            return Err(Error::Domain(format!("pair ({x}, {y}) violates x0 = {x0} <= x <= y")));
        }
        let dx = f.derivatives_unchecked(x);
        let dy = f.derivatives_unchecked(y);
        let mut check = |which: DerivativeInequality, slot: usize, lhs: f64, rhs: f64| {
            report.checked[slot] += 1;
            // NaN on either side counts as a violation.
            if lhs.is_nan() || rhs.is_nan() || lhs > rhs + rhs.abs() * REL_SLACK {
                report.violations.push(InequalityViolation {
                    inequality: which,
                    x,
                    y,
                    lhs,
                    rhs,
                });
            }
        };
        check(DerivativeInequality::AlmostMonotone, 0, x * dx.second, 2.0 * y * dy.second);
        if x >= 2.0 * x0 {
            check(DerivativeInequality::SlopeBound, 1, x * dx.second, 2.0 * dx.first);
        }
        check(DerivativeInequality::LogGrowth, 2, dx.first - fp_x0, 2.0 * x * dx.second * x.ln());
        if x >= 2.0 * x0 && y <= 2.0 * x {
            check(DerivativeInequality::DoublingQuotient, 3, dy.first, 3.0 * dx.first);
        }
    }
    Ok(report)
}

/// Deterministic admissible pairs: `x` log-spaced over `[max(lo, 2 x0), hi]`,
/// `y` within one octave of `x` for even indices and within eight octaves for
/// odd ones.
pub fn admissible_pairs(f: &IndexFunction, count: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let start = lo.max(2.0 * f.x0() as f64);
    if count == 0 || hi.is_nan() || hi <= start {
        return Vec::new();
    }
    let xs = log_spaced(start, hi, count.max(2));
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    xs.into_iter()
        .take(count)
        .enumerate()
        .map(|(j, x)| {
            let u = (j as f64 * GOLDEN).fract();
            let octaves = if j % 2 == 0 { u } else { 8.0 * u };
            (x, x * 2f64.powf(octaves))
        })
        .collect()
}
