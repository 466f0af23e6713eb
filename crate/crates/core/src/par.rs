//! Ordered chunk execution over integer ranges.
//!
//! With the `parallel` feature the chunks run on the current rayon pool;
//! without it they run in order on the calling thread. Either way the
//! results come back in ascending chunk order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default chunk length for range scans.
pub const DEFAULT_CHUNK: u64 = 4096;

/// Split `[lo, hi]` into consecutive inclusive chunks of at most `chunk` values.
pub fn chunks(lo: u64, hi: u64, chunk: u64) -> Vec<(u64, u64)> {
    assert!(chunk > 0, "chunk length must be positive");
    let mut out = Vec::new();
    if hi < lo {
        return out;
    }
    let mut start = lo;
    loop {
        let end = start.saturating_add(chunk - 1).min(hi);
        out.push((start, end));
        if end == hi {
            return out;
        }
        start = end + 1;
    }
}

/// Apply `f` to each chunk of `[lo, hi]`, results in chunk order.
pub fn map_chunks<T, F>(lo: u64, hi: u64, chunk: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    let parts = chunks(lo, hi, chunk);
    #[cfg(feature = "parallel")]
    {
        parts.into_par_iter().map(|(a, b)| f(a, b)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        parts.into_iter().map(|(a, b)| f(a, b)).collect()
    }
}

/// All `n` in `[lo, hi]` with `keep(n)`, ascending.
pub fn filter_range<F>(lo: u64, hi: u64, keep: F) -> Vec<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    map_chunks(lo, hi, DEFAULT_CHUNK, |a, b| (a..=b).filter(|&n| keep(n)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

/// Apply `f` to every item, preserving order.
pub fn map_items<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_exactly() {
        assert_eq!(chunks(1, 10, 4), vec![(1, 4), (5, 8), (9, 10)]);
        assert_eq!(chunks(5, 5, 100), vec![(5, 5)]);
        assert!(chunks(6, 5, 3).is_empty());
        assert_eq!(chunks(u64::MAX - 1, u64::MAX, 8), vec![(u64::MAX - 1, u64::MAX)]);
    }

    #[test]
    fn filter_is_ordered() {
        let evens = filter_range(1, 20_000, |n| n % 2 == 0);
        assert_eq!(evens.len(), 10_000);
        assert!(evens.windows(2).all(|w| w[0] < w[1]));
    }
}
