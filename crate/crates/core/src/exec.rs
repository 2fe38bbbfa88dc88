//! Sequential/parallel execution switch.
//!
//! Every data-parallel loop in the crate (replications, Monte Carlo blocks,
//! per-point pair search) takes an [`Execution`]. Results never depend on
//! it: random streams are keyed by work-item index and reductions are done
//! in index order. Without the `parallel` feature `Parallel` runs
//! sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
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
    /// Maps `f` over `0..n` and returns the results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Sums `f(i)` over `0..n`. Integer sums are order independent, so the
    /// parallel reduction is exact.
    pub fn sum_indexed<F>(self, n: usize, f: F) -> (u64, u64)
    where
        F: Fn(usize) -> (u64, u64) + Sync + Send,
    {
        let add = |a: (u64, u64), b: (u64, u64)| (a.0 + b.0, a.1 + b.1);
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).reduce(|| (0, 0), add)
            }
            _ => (0..n).map(f).fold((0, 0), add),
        }
    }
}

/// Sets the size of the global worker pool. A no-op without the `parallel`
/// feature. Fails if the pool was already initialised.
pub fn configure_threads(threads: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let f = |i: usize| (i as u64 * 3, 1);
        assert_eq!(
            Execution::Sequential.sum_indexed(1000, f),
            Execution::Parallel.sum_indexed(1000, f)
        );
        assert_eq!(
            Execution::Sequential.map_indexed(100, |i| i * i),
            Execution::Parallel.map_indexed(100, |i| i * i)
        );
    }
}
