//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] maps
//! work items on the rayon global pool. Without it, or with
//! [`Execution::Sequential`], items run in order on the calling thread.
//! Output order always follows input order, so results never depend on the
//! thread count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
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
    /// True when this mode actually fans out across threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maximum of `f` over `0..len`, ties resolved toward the lowest index.
    ///
    /// Returns `None` for an empty range. NaN scores are never selected.
    pub fn argmax<F>(self, len: usize, f: F) -> Option<(usize, f64)>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let better = |a: (usize, f64), b: (usize, f64)| -> (usize, f64) {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) || a.1.is_nan() {
                b
            } else {
                a
            }
        };
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..len)
                .into_par_iter()
                .map(|i| (i, f(i)))
                .filter(|(_, v)| !v.is_nan())
                .reduce_with(better);
        }
        (0..len).map(|i| (i, f(i))).filter(|(_, v)| !v.is_nan()).reduce(better)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let scores = [1.0, 3.0, 2.0, 3.0, f64::NAN];
            let best = exec.argmax(scores.len(), |i| scores[i]).unwrap();
            assert_eq!(best, (1, 3.0));
        }
    }

    #[test]
    fn map_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = Execution::Sequential.map(&items, |x| x * x);
        let par = Execution::Parallel.map(&items, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }

    #[test]
    fn empty_argmax() {
        assert!(Execution::Sequential.argmax(0, |_| 0.0).is_none());
    }
}
