//! Sequential / rayon execution switch.
//!
//! Every data-parallel loop in the crate goes through [`Execution::map`], so
//! the sequential and parallel paths produce results in the same order and
//! with bit-identical values. The parallel path only exists with the
//! `parallel` feature; without it, [`Execution::Parallel`] silently runs
//! sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this mode actually fans out to the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Runs `op` with at most `max_inflight` worker threads.
    ///
    /// Used for loops whose bodies block on upstream calls, so that the
    /// number of concurrent requests is bounded by the operator's cap rather
    /// than by the core count.
    pub fn with_inflight_cap<R, F>(self, max_inflight: usize, op: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            match rayon::ThreadPoolBuilder::new().num_threads(max_inflight.max(1)).build() {
                Ok(pool) => return pool.install(op),
                Err(e) => tracing::warn!("falling back to current pool: {e}"),
            }
        }
        let _ = max_inflight;
        op()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = Execution::Sequential.map(&xs, |x| x * x);
        let par = Execution::Parallel.map(&xs, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }

    #[test]
    fn capped_pool_runs_op() {
        let xs: Vec<u32> = (0..64).collect();
        let out = Execution::Parallel.with_inflight_cap(2, || Execution::Parallel.map(&xs, |x| x + 1));
        assert_eq!(out.len(), 64);
        assert_eq!(out[0], 1);
    }
}
