use rayon::prelude::*;
use stoklab_core::{Executor, Sequential};

/// Either the calling thread or a dedicated rayon pool.
///
/// Results come back in index order either way, so the thread count only
/// changes wall time.
pub enum Pool {
    Sequential,
    Rayon(rayon::ThreadPool),
}

impl Pool {
    /// `None` or `Some(1)` runs on the calling thread.
    pub fn new(threads: Option<usize>) -> Result<Self, rayon::ThreadPoolBuildError> {
        match threads {
            None | Some(0) | Some(1) => Ok(Pool::Sequential),
            Some(n) => Ok(Pool::Rayon(
                rayon::ThreadPoolBuilder::new().num_threads(n).build()?,
            )),
        }
    }
}

impl Executor for Pool {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Pool::Sequential => Sequential.map_indexed(n, f),
            Pool::Rayon(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let pool = Pool::new(Some(3)).unwrap();
        let out = pool.map_indexed(1000, |i| i * i);
        assert_eq!(out, (0..1000).map(|i| i * i).collect::<Vec<_>>());
    }
}
