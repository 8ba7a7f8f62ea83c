//! Sample-level data parallelism.
//!
//! With the `parallel` feature (on by default) work is spread over the rayon
//! pool; without it the same closures run sequentially. Output order always
//! follows input order, so results do not depend on the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(usize, &T) -> U,
{
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Whether sample sweeps run on the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
