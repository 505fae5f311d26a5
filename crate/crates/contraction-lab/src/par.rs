//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! the rayon pool; without it everything runs on the calling thread. Callers
//! can also force sequential execution at runtime through [`Exec`].

/// Execution strategy for the embarrassingly parallel loops in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

/// `(0..n).map(f).collect()`, in index order regardless of strategy.
pub fn map_indexed<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Sum of `f(i)` over `0..n` for integer counts, so the result does not
/// depend on how the range was split.
pub fn count_indexed<F>(exec: Exec, n: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).sum()
        }
        _ => (0..n).map(f).sum(),
    }
}

/// SplitMix64 step, used to derive independent per-task seeds from one master seed.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for task `i` of a batch started from `master`.
pub fn derive_seed(master: u64, i: u64) -> u64 {
    splitmix64(master ^ splitmix64(i.wrapping_add(1)))
}
