//! Data-parallel map over independent work items.
//!
//! With the `parallel` feature (default) the work is spread over the rayon
//! pool; without it everything runs on the calling thread. Both variants are
//! always reachable through [`seq`] and (feature permitting) [`par`], which is
//! what the benchmarks compare.

/// Map `f` over `items`, in parallel when the `parallel` feature is on.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        par::map(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq::map(items, f)
    }
}

pub mod seq {
    pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        F: Fn(&T) -> R,
    {
        items.iter().map(f).collect()
    }
}

#[cfg(feature = "parallel")]
pub mod par {
    use rayon::prelude::*;

    pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.par_iter().map(f).collect()
    }
}
