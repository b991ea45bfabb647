//! Block statistics of `u(n) = t(⌊f(n)⌋)`.
//!
//! The sequence starts at the first index of `f`; `N` always counts terms
//! (or window positions) from there.

use rayon::prelude::*;
use serde::Serialize;

use crate::digits::{thue_morse, BinaryDigits};
use crate::error::{Error, Result};
use crate::indexfn::IndexMap;
use crate::par;

/// Longest block length accepted by [`block_frequencies`].
pub const MAX_BLOCK: u32 = 12;

/// Longest factor length accepted by [`subword_complexity`].
pub const MAX_FACTOR: u32 = 24;

fn letters<F: IndexMap + ?Sized>(f: &F, lo: u64, hi: u64) -> Result<Vec<u8>> {
    Ok(par::floors(f, lo, hi)?.into_iter().map(|x| x.thue_morse()).collect())
}

/// Sliding-window counts of all length-`T` blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    #[serde(rename = "T")]
    pub t: u32,
    /// Number of window positions; equals `counts.iter().sum()`.
    #[serde(rename = "N")]
    pub n: u64,
    /// Indexed by the block read most significant bit first.
    pub counts: Vec<u64>,
    /// `counts[w] / N − 2^{−T}`.
    pub deviations: Vec<f64>,
    pub max_abs_deviation: f64,
}

impl FrequencyReport {
    /// Block `w` as a bitstring of length `T`.
    pub fn block_label(&self, w: usize) -> String {
        format!("{w:0width$b}", width = self.t as usize)
    }
}

/// Counts the `N` windows `u(n) … u(n+T−1)` starting at the first `N` positions.
pub fn block_frequencies<F: IndexMap + ?Sized>(f: &F, n: u64, t: u32) -> Result<FrequencyReport> {
    if t == 0 || t > MAX_BLOCK {
        return Err(Error::Invalid(format!("block length must lie in 1..={MAX_BLOCK}, got {t}")));
    }
    if n < 1 << t {
        return Err(Error::Invalid(format!("N = {n} is below 2^T = {}", 1u64 << t)));
    }
    let start = f.first_index();
    let end = par::offset(start, n, "sequence end")?;
    par::offset(end, u64::from(t), "window end")?;
    let size = 1usize << t;
    let mask = size - 1;
    let partial = par::map_chunks(start, end, |lo, hi| {
        let u = letters(f, lo, hi + u64::from(t) - 1)?;
        let mut counts = vec![0u64; size];
        let mut w = u[..t as usize - 1].iter().fold(0usize, |acc, &b| acc << 1 | usize::from(b));
        for &b in &u[t as usize - 1..] {
            w = (w << 1 | usize::from(b)) & mask;
            counts[w] += 1;
        }
        Ok(counts)
    })?;
    let counts = partial.into_iter().fold(vec![0u64; size], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, x)| *a += x);
        acc
    });
    let positions = end - start;
    let expected = 1.0 / size as f64;
    let deviations: Vec<f64> = counts.iter().map(|&c| c as f64 / positions as f64 - expected).collect();
    let max_abs_deviation = deviations.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(FrequencyReport {
        t,
        n: positions,
        counts,
        deviations,
        max_abs_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityRow {
    pub k: u32,
    pub count: u64,
}

/// Distinct length-`k` factors of the Thue–Morse prefix, `k = 1..=k_max`.
pub fn subword_complexity(prefix_length: u64, k_max: u32) -> Result<Vec<ComplexityRow>> {
    if k_max == 0 || k_max > MAX_FACTOR {
        return Err(Error::Invalid(format!("k_max must lie in 1..={MAX_FACTOR}, got {k_max}")));
    }
    if prefix_length < 1 << k_max {
        return Err(Error::Invalid(format!(
            "prefix length {prefix_length} is below 2^k_max = {}",
            1u64 << k_max
        )));
    }
    let prefix: Vec<u8> = (0..prefix_length).into_par_iter().map(thue_morse).collect();
    Ok((1..=k_max)
        .into_par_iter()
        .map(|k| {
            let mask = (1usize << k) - 1;
            let mut seen = vec![0u64; (1usize << k).div_ceil(64)];
            let mut w = 0usize;
            for (j, &b) in prefix.iter().enumerate() {
                w = (w << 1 | usize::from(b)) & mask;
                if j + 1 >= k as usize {
                    seen[w / 64] |= 1 << (w % 64);
                }
            }
            let count = seen.iter().map(|x| u64::from(x.count_ones())).sum();
            ComplexityRow { k, count }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    #[serde(rename = "N")]
    pub n: u64,
    pub ones: u64,
    /// Proportion of ones among the first `N` terms.
    pub density: f64,
}

/// Running density of ones at each checkpoint.
pub fn letter_density_trace<F: IndexMap + ?Sized>(f: &F, checkpoints: &[u64]) -> Result<Vec<DensityPoint>> {
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("checkpoints must be strictly increasing".into()));
    }
    if checkpoints.first() == Some(&0) {
        return Err(Error::Invalid("checkpoints must be positive".into()));
    }
    let start = f.first_index();
    let mut ones = 0u64;
    let mut from = start;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let to = par::offset(start, n, "checkpoint")?;
        ones += par::map_chunks(from, to, |lo, hi| {
            Ok(letters(f, lo, hi)?.into_iter().map(u64::from).sum::<u64>())
        })?
        .into_iter()
        .sum::<u64>();
        from = to;
        out.push(DensityPoint {
            n,
            ones,
            density: ones as f64 / n as f64,
        });
    }
    Ok(out)
}

/// `max − min` of the densities over the last `count` points.
pub fn tail_spread(trace: &[DensityPoint], count: usize) -> f64 {
    let tail = &trace[trace.len().saturating_sub(count)..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.density), hi.max(p.density)));
    if tail.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::thue_morse_prefix_by_substitution;
    use crate::{IndexFunction, Real};

    fn identity() -> IndexFunction {
        IndexFunction::real_power(Real::from_integer(1)).unwrap()
    }

    #[test]
    fn raw_sequence_frequencies() {
        let f = identity();
        let r = block_frequencies(&f, 1 << 20, 1).unwrap();
        assert_eq!(r.counts, vec![1 << 19, 1 << 19]);
        assert_eq!(r.max_abs_deviation, 0.0);
        let r = block_frequencies(&f, 1 << 20, 2).unwrap();
        let freq: Vec<f64> = r.counts.iter().map(|&c| c as f64 / r.n as f64).collect();
        assert!((freq[1] - 1.0 / 3.0).abs() < 1e-3 && (freq[2] - 1.0 / 3.0).abs() < 1e-3);
        assert!((freq[0] - 1.0 / 6.0).abs() < 1e-3 && (freq[3] - 1.0 / 6.0).abs() < 1e-3);
        assert!(r.max_abs_deviation > 0.05);
        assert_eq!(r.block_label(1), "01");
    }

    #[test]
    fn counts_by_enumeration() {
        let f = IndexFunction::rational_power(6, 5).unwrap();
        let (n, t) = (5000u64, 3u32);
        let r = block_frequencies(&f, n, t).unwrap();
        let u: Vec<u8> = (0..n + u64::from(t) - 1).map(|k| f.floor(k).unwrap().thue_morse()).collect();
        let mut counts = vec![0u64; 8];
        for w in u.windows(3) {
            counts[usize::from(w[0]) * 4 + usize::from(w[1]) * 2 + usize::from(w[2])] += 1;
        }
        assert_eq!(r.counts, counts);
        assert_eq!(r.counts.iter().sum::<u64>(), r.n);
    }

    #[test]
    fn consistent_across_block_lengths() {
        let f = IndexFunction::rational_power(5, 4).unwrap();
        for t in 1..6u32 {
            let short = block_frequencies(&f, 1 << 14, t).unwrap();
            let long = block_frequencies(&f, 1 << 14, t + 1).unwrap();
            for (w, &c) in short.counts.iter().enumerate() {
                let ext = long.counts[2 * w] + long.counts[2 * w + 1];
                assert!(c.abs_diff(ext) <= 1, "T {t} block {w}");
            }
        }
    }

    #[test]
    fn frequency_errors() {
        let f = identity();
        assert!(block_frequencies(&f, 100, 0).is_err());
        assert!(block_frequencies(&f, 1 << 14, 13).is_err());
        assert!(block_frequencies(&f, 7, 3).is_err());
    }

    /// Distinct factors collected in a hash set.
    fn factors_oracle(prefix: &[u8], k: usize) -> u64 {
        prefix.windows(k).collect::<std::collections::HashSet<_>>().len() as u64
    }

    #[test]
    fn complexity() {
        let rows = subword_complexity(1 << 16, 16).unwrap();
        assert_eq!(rows[0], ComplexityRow { k: 1, count: 2 });
        assert_eq!(rows[2].count, 6);
        let prefix = thue_morse_prefix_by_substitution(1 << 16);
        for row in &rows {
            assert_eq!(row.count, factors_oracle(&prefix, row.k as usize));
            assert!(row.count <= 4 * u64::from(row.k));
        }
        assert!(subword_complexity(100, 8).is_err());
        assert!(subword_complexity(1 << 26, 25).is_err());
    }

    #[test]
    fn density() {
        let f = identity();
        let checkpoints: Vec<u64> = (1..18).map(|k| 1u64 << k).collect();
        let trace = letter_density_trace(&f, &checkpoints).unwrap();
        assert!(trace.iter().all(|p| p.density == 0.5));
        assert_eq!(tail_spread(&trace, 8), 0.0);

        let f = IndexFunction::rational_power(6, 5).unwrap();
        let trace = letter_density_trace(&f, &[10, 1000, 100_000]).unwrap();
        let ones = (0..1000u64).filter(|&n| f.floor(n).unwrap().thue_morse() == 1).count() as u64;
        assert_eq!(trace[1].ones, ones);
        assert!((trace[2].density - 0.5).abs() < 0.01);
        assert!(letter_density_trace(&f, &[10, 10]).is_err());
        assert!(letter_density_trace(&f, &[]).unwrap().is_empty());
    }
}
