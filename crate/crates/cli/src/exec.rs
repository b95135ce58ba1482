//! Thread-pool executor for the core estimators.

use naifs_pressure::Executor;
use rayon::prelude::*;

/// Runs `map` on a private rayon pool; one worker means the calling thread.
pub struct Workers {
    pool: Option<rayon::ThreadPool>,
    count: usize,
}

impl Workers {
    pub fn new(count: usize) -> Result<Workers, String> {
        let count = count.max(1);
        let pool = if count == 1 {
            None
        } else {
            Some(rayon::ThreadPoolBuilder::new().num_threads(count).build().map_err(|e| e.to_string())?)
        };
        Ok(Workers { pool, count })
    }

    /// Worker count from `PRESSURE_WORKERS`, else the available parallelism.
    pub fn from_env() -> Result<Workers, String> {
        let count = match std::env::var("PRESSURE_WORKERS") {
            Ok(v) => v.trim().parse::<usize>().map_err(|_| format!("PRESSURE_WORKERS={v:?} is not a worker count"))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        Workers::new(count)
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

impl Executor for Workers {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| items.par_iter().map(f).collect()),
            None => items.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_input_order() {
        let items: Vec<u64> = (0..1000).collect();
        let a = Workers::new(4).unwrap().map(&items, |x| x * x);
        let b = Workers::new(1).unwrap().map(&items, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(a[999], 998001);
    }
}
