//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon; without it they
//! run the same closures in order. Callers never see the difference: every
//! helper produces its output in index order, so results are identical
//! regardless of scheduling or thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..len` and collects the results in index order.
pub fn map_indices<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Maps `f` over the items of a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
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

/// Builds a `width * height` raster row by row. `row` fills one scanline.
pub fn fill_rows<T, F>(width: usize, height: usize, fill: T, row: F) -> Vec<T>
where
    T: Clone + Send + Sync,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let mut out = vec![fill; width * height];
    if width == 0 {
        return out;
    }
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(width)
            .enumerate()
            .for_each(|(y, line)| row(y, line));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(width)
            .enumerate()
            .for_each(|(y, line)| row(y, line));
    }
    out
}

/// Runs `op` with at most `workers` threads (0 = all available).
///
/// Sequential builds ignore the worker count.
pub fn with_workers<R, F>(workers: usize, op: F) -> crate::Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| crate::Error::invalid(format!("thread pool: {e}")))?;
        Ok(pool.install(op))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok(op())
    }
}

/// Threads available to the current pool; 1 in sequential builds.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Whether this build runs data-parallel.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
