//! Order-preserving map over a batch, on the rayon pool when the `parallel`
//! feature is enabled and sequentially otherwise.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How many workers a batch may use. `Some(1)` always runs on the calling
/// thread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Workers(pub Option<usize>);

impl Workers {
    pub fn sequential() -> Self {
        Workers(Some(1))
    }

    pub fn is_sequential(self) -> bool {
        self.0 == Some(1) || !cfg!(feature = "parallel")
    }
}

pub fn map<T, R, F>(items: &[T], workers: Workers, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if workers.is_sequential() {
        return items.iter().map(f).collect();
    }
    parallel_map(items, workers, f)
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(items: &[T], workers: Workers, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match workers.0 {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(|| items.par_iter().map(&f).collect()),
        None => items.par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(items: &[T], _workers: Workers, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
