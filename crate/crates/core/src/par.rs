//! Execution strategy for the data-parallel inner loops.
//!
//! With the `parallel` feature (default) the [`Exec::Parallel`] strategy runs
//! on the rayon global pool; without it every strategy runs sequentially.
//! Results never depend on the strategy: reductions used here are either
//! exact (min/max, integer counts) or combine per-item values in index order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..n).map(f).collect()`, possibly in parallel; order is preserved.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Applies `f` to consecutive chunks of `data` of length `chunk`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(&mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk).for_each(f);
            return;
        }
        data.chunks_mut(chunk).for_each(f);
    }

    /// Minimum of `f` over a slice (NaN-free inputs assumed).
    pub fn min_by_key<S, F>(self, items: &[S], f: F) -> f64
    where
        S: Sync,
        F: Fn(&S) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).reduce(|| f64::INFINITY, f64::min);
        }
        items.iter().map(f).fold(f64::INFINITY, f64::min)
    }

    /// Whether any item satisfies the predicate.
    pub fn any<S, F>(self, items: &[S], f: F) -> bool
    where
        S: Sync,
        F: Fn(&S) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().any(f);
        }
        items.iter().any(f)
    }
}
