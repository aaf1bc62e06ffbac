use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates `f(0..count)` on `workers` threads, returning results in index order.
///
/// Each task must own its randomness (for example a seed derived from the
/// index), so the output does not depend on `workers`.
pub fn map_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers == 0 {
        return Err(Error::InvalidArgument("worker count must be positive".into()));
    }
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}
