//! Data-parallel loop shim.
//!
//! With the `parallel` feature (default) the loops run on rayon; without it
//! they compile to plain sequential iteration. Output order equals index
//! order in both builds, so results do not depend on the thread count.
//! Thread count can be overridden through the `RAYON_NUM_THREADS`
//! environment variable.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ordered map over `0..n`.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Ordered map over the items of a slice.
pub(crate) fn map_slice<'a, T, U, F>(items: &'a [T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&'a T) -> U + Sync + Send,
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
