//! Data-parallel helpers with a sequential fallback when the `parallel` feature is off.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over a slice, preserving order.
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Points of `lo..=hi` failing `ok`, ascending. Sequential.
pub fn failures_seq(lo: u64, hi: u64, ok: impl Fn(u64) -> bool) -> Vec<u64> {
    (lo..=hi).filter(|&n| !ok(n)).collect()
}

/// Points of `lo..=hi` failing `ok`, ascending. Parallel when enabled.
pub fn failures(lo: u64, hi: u64, ok: impl Fn(u64) -> bool + Sync + Send) -> Vec<u64> {
    #[cfg(feature = "parallel")]
    {
        if hi - lo >= 4096 {
            return (lo..=hi).into_par_iter().filter(|&n| !ok(n)).collect();
        }
    }
    failures_seq(lo, hi, ok)
}

/// First point of `lo..=hi` failing `ok`.
pub fn first_failure(lo: u64, hi: u64, ok: impl Fn(u64) -> bool + Sync + Send) -> Option<u64> {
    #[cfg(feature = "parallel")]
    {
        if hi - lo >= 4096 {
            return (lo..=hi).into_par_iter().find_first(|&n| !ok(n));
        }
    }
    (lo..=hi).find(|&n| !ok(n))
}
