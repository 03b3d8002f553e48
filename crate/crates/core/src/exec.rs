//! Execution strategy for the data-parallel kernels.
//!
//! With the `parallel` feature (on by default) the layer loops, row loops of
//! the sparse kernels and the k-means restarts fan out over rayon. Without it,
//! or with [`Execution::Sequential`], everything runs on the calling thread.
//! Both strategies produce bit-identical results: per-layer contributions are
//! always accumulated in layer order.

/// How a kernel distributes its work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Number of independent work items to keep in flight at once.
    pub(crate) fn width(self) -> usize {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return rayon::current_num_threads().max(1);
        }
        1
    }

    /// Maps `f` over `0..len`, preserving index order in the output.
    pub(crate) fn map_indexed<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && len > 1 {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Fills `out[i] = f(i)`, splitting the slice into chunks when parallel.
    pub(crate) fn fill<T, F>(self, out: &mut [T], min_chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && out.len() > min_chunk {
            use rayon::prelude::*;
            out.par_chunks_mut(min_chunk).enumerate().for_each(|(c, chunk)| {
                let base = c * min_chunk;
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = f(base + k);
                }
            });
            return;
        }
        let _ = min_chunk;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
    }
}

impl Execution {
    /// Runs two closures, concurrently when parallel.
    pub(crate) fn join<A, B, RA, RB>(self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return rayon::join(a, b);
        }
        (a(), b())
    }
}
