//! Order-preserving map over a slice, parallel when the `parallel` feature is
//! enabled. Both paths produce identical output vectors: work items are pure
//! and results are collected in input order, so the downstream fixed-order
//! reduction sees the same values regardless of thread count.

#[cfg(feature = "parallel")]
pub(crate) fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
