//! Data-parallel building blocks.
//!
//! With the `parallel` feature (default) these run on the rayon pool; without
//! it they fall back to plain sequential loops. Every helper writes disjoint
//! outputs or reduces in index order, so results are bit-identical regardless
//! of the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..len` and collects the results in index order.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
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

/// Maps over a slice, preserving order.
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

/// Splits `buf` into consecutive chunks of `chunk` elements and calls
/// `f(chunk_index, chunk)` on each.
pub fn for_each_chunk_mut<F>(buf: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    assert!(chunk > 0);
    #[cfg(feature = "parallel")]
    {
        buf.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        buf.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Fills `out[i] = f(i)` for every element.
pub fn fill_with<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    }
}

/// A reusable scope in which data parallelism is restricted to one thread.
///
/// Used by the benchmarks to compare the parallel and sequential paths of the
/// same binary.
pub struct Sequential {
    #[cfg(feature = "parallel")]
    pool: rayon::ThreadPool,
}

impl Sequential {
    pub fn new() -> Self {
        Self {
            #[cfg(feature = "parallel")]
            pool: rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .expect("single-thread pool"),
        }
    }

    pub fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        {
            self.pool.install(f)
        }
        #[cfg(not(feature = "parallel"))]
        {
            f()
        }
    }
}

impl Default for Sequential {
    fn default() -> Self {
        Self::new()
    }
}

/// Runs `f` once with data parallelism restricted to the calling thread.
pub fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    Sequential::new().run(f)
}

/// Number of worker threads the helpers above will use.
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

/// Environment variable that sets the worker-pool size for the CLI.
pub const THREADS_ENV: &str = "VORTNET_THREADS";

/// Configures the global pool from [`THREADS_ENV`]; absent or empty means all
/// available cores. Returns the resulting thread count.
pub fn init_global_pool() -> std::result::Result<usize, String> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => Some(
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {s:?}"))?,
        ),
        _ => None,
    };
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = requested {
            builder = builder.num_threads(t);
        }
        // A second initialisation (e.g. in tests) keeps the existing pool.
        let _ = builder.build_global();
        Ok(rayon::current_num_threads())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = requested;
        Ok(1)
    }
}
