//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] fans work out
//! over rayon's pool. Without it every call runs on the current thread. Both
//! paths return results in input order, and reductions are folded
//! sequentially over fixed-size chunks, so the choice never changes a single
//! output bit.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Chunk length used by [`chunked_reduce`].
pub const REDUCE_CHUNK: usize = 512;

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Like [`map`] but hands each worker a scratch value built by `init`.
pub fn map_init<T, S, R, I, F>(exec: Execution, items: &[T], init: I, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map_init(&init, |s, t| f(s, t)).collect();
    }
    let _ = exec;
    let mut scratch = init();
    items.iter().map(|t| f(&mut scratch, t)).collect()
}

/// Maps each fixed-size chunk of `items` to a partial result and folds the
/// partials left to right.
pub fn chunked_reduce<T, R, M, C>(exec: Execution, items: &[T], map_chunk: M, combine: C) -> Option<R>
where
    T: Sync,
    R: Send,
    M: Fn(&[T]) -> R + Sync + Send,
    C: Fn(R, R) -> R,
{
    let chunks: Vec<&[T]> = items.chunks(REDUCE_CHUNK).collect();
    let partials = map(exec, &chunks, |c| map_chunk(c));
    partials.into_iter().reduce(combine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree_bitwise() {
        let xs: Vec<f64> = (0..5000).map(|i| (i as f64 * 0.37).sin()).collect();
        let sum = |e| {
            chunked_reduce(e, &xs, |c| c.iter().sum::<f64>(), |a, b| a + b).unwrap()
        };
        assert_eq!(sum(Execution::Sequential).to_bits(), sum(Execution::Parallel).to_bits());
        let a = map(Execution::Sequential, &xs, |x| x * 2.0);
        let b = map_init(Execution::Parallel, &xs, || 2.0, |s, x| x * *s);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_reduce_is_none() {
        let xs: [f64; 0] = [];
        assert!(chunked_reduce(Execution::default(), &xs, |c| c.len(), |a, b| a + b).is_none());
    }
}
