//! Execution helpers for the data-parallel inner loops.
//!
//! Every hot loop in the crate goes through this module. With the `parallel`
//! feature (on by default) the loops run on rayon; without it the same code
//! runs sequentially. Reductions are chunked at fixed boundaries and the
//! partials combined in index order, so sums and norms are bit-identical
//! across thread counts and with the feature disabled.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed chunk length for reductions and elementwise sweeps.
const CHUNK: usize = 4096;

/// Configure the global thread pool from `GPSAV_THREADS`.
///
/// Call once at process start (the CLI does). Without the `parallel`
/// feature this is a no-op. Errors from an already-built pool are ignored.
pub fn init_threads_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("GPSAV_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    }
}

/// `out[i] = f(i)` for all i.
pub(crate) fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let base = ci * CHUNK;
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = f(base + i);
            }
        });
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, v) in out.iter_mut().enumerate() {
            *v = f(i);
        }
    }
}

/// In-place `f(i, &mut data[i])` for all i.
pub(crate) fn update_indexed<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                let base = ci * CHUNK;
                for (i, v) in chunk.iter_mut().enumerate() {
                    f(base + i, v);
                }
            });
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, v) in data.iter_mut().enumerate() {
            f(i, v);
        }
    }
}

/// Apply `f` to consecutive chunks of `len` elements, passing the chunk index.
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    debug_assert_eq!(data.len() % len, 0);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, c) in data.chunks_mut(len).enumerate() {
            f(i, c);
        }
    }
}

/// Like [`for_each_chunk_mut`] but with a per-worker scratch state.
pub(crate) fn for_each_chunk_mut_with<T, S, I, F>(data: &mut [T], len: usize, init: I, f: F)
where
    T: Send,
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync,
{
    debug_assert_eq!(data.len() % len, 0);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(len)
            .enumerate()
            .for_each_init(&init, |s, (i, c)| f(s, i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = init();
        for (i, c) in data.chunks_mut(len).enumerate() {
            f(&mut s, i, c);
        }
    }
}

fn chunk_bounds(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .step_by(CHUNK.max(1))
        .map(|lo| (lo, (lo + CHUNK).min(n)))
        .collect()
}

#[cfg(feature = "parallel")]
fn map_chunks<R: Send>(n: usize, f: impl Fn(usize, usize) -> R + Sync) -> Vec<R> {
    chunk_bounds(n)
        .into_par_iter()
        .map(|(lo, hi)| f(lo, hi))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn map_chunks<R: Send>(n: usize, f: impl Fn(usize, usize) -> R + Sync) -> Vec<R> {
    chunk_bounds(n)
        .into_iter()
        .map(|(lo, hi)| f(lo, hi))
        .collect()
}

/// Deterministic chunked sum of `term(i)` over `0..n`.
pub(crate) fn sum_f64(n: usize, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    map_chunks(n, |lo, hi| (lo..hi).fold(0.0, |acc, i| acc + term(i)))
        .into_iter()
        .sum()
}

/// Deterministic chunked complex sum of `term(i)` over `0..n`.
pub(crate) fn sum_c64(n: usize, term: impl Fn(usize) -> Complex64 + Sync) -> Complex64 {
    map_chunks(n, |lo, hi| {
        (lo..hi).fold(Complex64::new(0.0, 0.0), |acc, i| acc + term(i))
    })
    .into_iter()
    .sum()
}

/// Maximum of `term(i)` over `0..n` (0.0 for an empty range).
pub(crate) fn max_f64(n: usize, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    map_chunks(n, |lo, hi| (lo..hi).fold(0.0f64, |acc, i| acc.max(term(i))))
        .into_iter()
        .fold(0.0f64, f64::max)
}
