//! Ordered data-parallel map with a sequential fallback.

use crate::error::Result;

/// Whether the crate was built with the `parallel` feature.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}

/// Applies `f` to `0..n` and collects results in index order. Runs on the
/// rayon pool when `parallel` is requested and the feature is enabled.
pub(crate) fn try_map<T, F>(n: usize, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}
