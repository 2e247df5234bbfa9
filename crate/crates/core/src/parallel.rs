//! Order-preserving map over independent jobs, on a rayon pool when the `parallel`
//! feature is enabled and more than one job is allowed.

#[cfg(feature = "parallel")]
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Concurrency budget for batches of independent integrations.
#[derive(Clone, Debug)]
pub struct Parallelism {
    jobs: usize,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism::with_jobs(0)
    }
}

impl Parallelism {
    pub fn sequential() -> Self {
        Parallelism::with_jobs(1)
    }

    /// `jobs = 0` uses every available core; `jobs = 1` runs on the calling thread.
    pub fn with_jobs(jobs: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = (jobs != 1)
                .then(|| {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(jobs)
                        .build()
                        .ok()
                })
                .flatten()
                .map(Arc::new);
            Parallelism { jobs, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Parallelism { jobs }
        }
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// Applies `f` to every item; output order matches input order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..500).collect();
        let seq = Parallelism::sequential().map(&items, |v| v * v + 1);
        let par = Parallelism::with_jobs(4).map(&items, |v| v * v + 1);
        assert_eq!(seq, par);
        assert!(!Parallelism::sequential().is_parallel());
    }
}
