//! Thread pool sized by `TILELAT_THREADS` (all cores when unset) and
//! order-preserving batch evaluation.

use rayon::prelude::*;

use crate::error::CliError;

pub const THREADS_VAR: &str = "TILELAT_THREADS";

pub fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{THREADS_VAR}: {e}"))),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{s}`"))),
        },
    }
}

pub fn pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// `items.map(f)` evaluated in `pool`, results in input order.
pub fn map_ordered<T, R, F>(pool: &rayon::ThreadPool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    pool.install(|| items.par_iter().map(&f).collect())
}

/// Splits `items` into at most `pieces` contiguous chunks.
pub fn chunks<T>(items: &[T], pieces: usize) -> Vec<&[T]> {
    if items.is_empty() {
        return Vec::new();
    }
    let size = items.len().div_ceil(pieces.max(1));
    items.chunks(size).collect()
}
