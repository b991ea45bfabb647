//! Fixed-size range partitioning.
//!
//! Chunk boundaries depend only on the range, never on the worker count, so
//! results reduced in chunk order are identical for any thread pool.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indexfn::IndexMap;

pub(crate) const CHUNK: u64 = 1 << 14;

/// `[start, end)` split into consecutive chunks of at most `CHUNK` integers.
pub(crate) fn chunks(start: u64, end: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(((end.saturating_sub(start)) / CHUNK + 1) as usize);
    let mut lo = start;
    while lo < end {
        let hi = lo.saturating_add(CHUNK).min(end);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// Maps every chunk in parallel and returns the results in chunk order.
pub(crate) fn map_chunks<T, F>(start: u64, end: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    chunks(start, end)
        .into_par_iter()
        .map(|(lo, hi)| f(lo, hi))
        .collect()
}

/// `⌊f(n)⌋` for `n ∈ [lo, hi)`.
pub(crate) fn floors<F: IndexMap + ?Sized>(f: &F, lo: u64, hi: u64) -> Result<Vec<u128>> {
    (lo..hi).map(|n| f.floor(n)).collect()
}

/// `start + extra` or an overflow error naming `what`.
pub(crate) fn offset(start: u64, extra: u64, what: &str) -> Result<u64> {
    start
        .checked_add(extra)
        .ok_or_else(|| Error::Overflow(format!("{what} exceeds u64")))
}

/// Domain check for ranges whose smallest index is `lo`.
pub(crate) fn check_start<F: IndexMap + ?Sized>(f: &F, lo: u64) -> Result<()> {
    if lo < f.first_index() {
        return Err(Error::Domain(format!(
            "index {lo} precedes the first admissible index {}",
            f.first_index()
        )));
    }
    Ok(())
}
