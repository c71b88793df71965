//! Deterministic parallel map over replica indices.

use rayon::prelude::*;

/// Maps `f` over `0..n` in parallel and returns results in index order.
///
/// `threads = 0` uses the global pool. Results never depend on `threads`
/// because each index owns its randomness and reduction happens afterwards.
pub fn par_map<T, F>(n: u64, threads: usize, f: F) -> Vec<T>
where
  T: Send,
  F: Fn(u64) -> T + Sync + Send,
{
  let job = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
  if threads == 0 {
    return job();
  }
  match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
    Ok(pool) => pool.install(job),
    Err(_) => job(),
  }
}

/// Runs `job` on a pool of `threads` workers (the global pool when 0), so
/// nested [`par_map`] calls with `threads = 0` use that pool.
pub fn with_threads<T: Send, F: FnOnce() -> T + Send>(threads: usize, job: F) -> T {
  if threads == 0 {
    return job();
  }
  match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
    Ok(pool) => pool.install(job),
    Err(_) => job(),
  }
}
