//! Replica-parallel execution.
//!
//! Replica `i` always draws from `source.replica(i)` and results come back in
//! replica order, so any reduction over them is independent of how many
//! worker threads the ambient rayon pool has.

use rayon::prelude::*;

use crate::source::RandomSource;

pub fn map_replicas<T, F>(source: &RandomSource, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, RandomSource) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map(|i| f(i, source.replica(i as u64)))
        .collect()
}

/// Fallible variant; the first error in replica order wins.
pub fn try_map_replicas<T, E, F>(source: &RandomSource, reps: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, RandomSource) -> Result<T, E> + Sync + Send,
{
    map_replicas(source, reps, f).into_iter().collect()
}
