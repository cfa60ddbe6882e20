//! Deterministic sequential/parallel dispatch for the enumeration loops.
//!
//! Results are collected in index order, so output is identical
//! regardless of mode or worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }

    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Map `f` over `0..total`, preserving index order in the output.
pub fn map_indices<T, F>(total: u64, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..total).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..total).into_par_iter().map(f).collect(),
    }
}

/// Filter-map over `0..total`, preserving index order.
pub fn filter_map_indices<T, F>(total: u64, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..total).filter_map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..total).into_par_iter().filter_map(f).collect(),
    }
}
