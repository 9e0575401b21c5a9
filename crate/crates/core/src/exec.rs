//! Execution policy for data-parallel sweeps.
//!
//! `Execution::Parallel` maps with rayon when the crate is built with the
//! `parallel` feature; without it every policy runs sequentially. Output
//! order always matches input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this policy actually fans out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps over `0..n`.
    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Weighted sum `sum_i w_i f(x_i)`, reduced in input order so the result
    /// does not depend on the policy.
    pub fn weighted_sum<F>(self, nodes: &[f64], weights: &[f64], f: F) -> f64
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let values = self.map(nodes, |&x| f(x));
        crate::numerics::neumaier_sum(values.iter().zip(weights).map(|(v, w)| v * w))
    }
}
