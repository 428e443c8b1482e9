//! Batch execution over independent jobs.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] fans jobs out
//! over the rayon thread pool. Without it every mode runs sequentially. Either
//! way results come back in input order, so output is identical across modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when the crate was built with rayon support.
pub const PARALLEL_ENABLED: bool = cfg!(feature = "parallel");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// The mode that will actually run, after accounting for disabled features.
    pub fn effective(self) -> Execution {
        if PARALLEL_ENABLED {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Like [`map`], short-circuiting on the first error in input order.
pub fn try_map<T, R, E, F>(exec: Execution, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    // Collecting everything first keeps the reported error deterministic.
    map(exec, items, f).into_iter().collect()
}

/// Runs `job` on a dedicated pool of `workers` threads. `None` uses the
/// global pool. Sequential builds just call `job`.
pub fn with_workers<R, F>(workers: Option<usize>, job: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => return pool.install(job),
            Err(_) => return job(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    job()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map(Execution::Sequential, &items, |x| x * x);
        let par = map(Execution::Parallel, &items, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }

    #[test]
    fn first_error_in_input_order_wins() {
        let items: Vec<i32> = (0..100).collect();
        let r: Result<Vec<i32>, i32> = try_map(Execution::Parallel, &items, |&x| {
            if x % 30 == 29 {
                Err(x)
            } else {
                Ok(x)
            }
        });
        assert_eq!(r, Err(29));
    }

    #[test]
    fn worker_pool_runs_job() {
        let items: Vec<u32> = (0..64).collect();
        let out = with_workers(Some(2), || map(Execution::Parallel, &items, |x| x + 1));
        assert_eq!(out.len(), 64);
        assert_eq!(out[63], 64);
    }
}
