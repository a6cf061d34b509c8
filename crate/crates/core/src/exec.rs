//! Data-parallel helpers for the independent-evaluation loops (grid-point
//! flow evaluation, lemma ensembles, batches of runs).
//!
//! With the `parallel` feature the [`Backend::Parallel`] variant runs on the
//! rayon pool. Results are always collected in index order and no floating
//! point reduction happens inside these helpers, so the output is bitwise the
//! same on either backend.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

/// The parallel backend when it is compiled in.
#[allow(clippy::derivable_impls)]
impl Default for Backend {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Backend::Parallel;
        #[cfg(not(feature = "parallel"))]
        Backend::Sequential
    }
}

impl Backend {
    /// Every backend compiled into this build.
    pub fn available() -> Vec<Backend> {
        vec![
            Backend::Sequential,
            #[cfg(feature = "parallel")]
            Backend::Parallel,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Backend::Parallel => "parallel",
        }
    }
}

/// `(0..n).map(f)` collected in order.
pub fn map_indexed<T, F>(backend: Backend, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match backend {
        Backend::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Backend::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Fallible variant of [`map_indexed`]. The reported error is the one with
/// the lowest index, independent of scheduling.
pub fn try_map_indexed<T, E, F>(backend: Backend, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(backend, n, f).into_iter().collect()
}

/// Apply `f` to each item of a slice, preserving order.
pub fn map_slice<S, T, F>(backend: Backend, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    match backend {
        Backend::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Backend::Parallel => items.par_iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_agree_and_preserve_order() {
        let reference: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        for b in Backend::available() {
            let got = map_indexed(b, 1000, |i| (i as f64).sin());
            assert_eq!(got, reference, "{}", b.name());
        }
    }

    #[test]
    fn lowest_index_error_wins() {
        for b in Backend::available() {
            let r: Result<Vec<usize>, usize> =
                try_map_indexed(b, 100, |i| if i % 7 == 3 { Err(i) } else { Ok(i) });
            assert_eq!(r, Err(3));
        }
    }
}
