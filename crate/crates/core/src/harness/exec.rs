//! Index-ordered parallel execution of independent runs.

/// How runs are scheduled. Results never depend on the choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Use the ambient rayon pool (all cores unless configured otherwise).
    #[default]
    Auto,
    /// A dedicated pool with this many worker threads.
    Workers(usize),
}

impl Parallelism {
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            None => Parallelism::Auto,
            Some(0 | 1) => Parallelism::Sequential,
            Some(n) => Parallelism::Workers(n),
        }
    }
}

/// Evaluates `f(0), ..., f(n - 1)` and returns the results in index order.
/// Without the `parallel` feature every mode runs sequentially.
pub fn map_runs<T, F>(n: u64, par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match par {
            Parallelism::Sequential => {}
            Parallelism::Auto => return (0..n).into_par_iter().map(f).collect(),
            Parallelism::Workers(k) => {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                    return pool.install(|| (0..n).into_par_iter().map(&f).collect());
                }
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = par;
    (0..n).map(f).collect()
}
