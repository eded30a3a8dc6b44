//! Indexed map helpers with an optional rayon backend.
//!
//! Every Monte-Carlo loop in this crate draws its randomness from a
//! counter-based generator keyed by (seed, stream, index), so trials are
//! independent of scheduling. These helpers exploit that: `par_map_indexed`
//! fans the index range out to rayon when the `parallel` feature is enabled
//! and collects results in index order, which keeps aggregation
//! deterministic. `seq_map_indexed` is the always-available fallback and is
//! what `par_map_indexed` degrades to when the feature is off.

/// Map `f` over `0..n` sequentially.
pub fn seq_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Map `f` over `0..n`, in parallel when the `parallel` feature is enabled.
///
/// Results are returned in index order either way.
#[cfg(feature = "parallel")]
pub fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, in parallel when the `parallel` feature is enabled.
///
/// Results are returned in index order either way.
#[cfg(not(feature = "parallel"))]
pub fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    seq_map_indexed(n, f)
}
