//! Thin wrappers that run a kernel on rayon when the `parallel` feature is on
//! and sequentially otherwise. Reductions are chunked so that the summation
//! order (and therefore the result) does not depend on the thread count.

/// Chunk length for deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

/// `out[i] = f(i)` for every index.
pub fn fill_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }
}

/// Sum of `f(i)` for `i in 0..n`, accumulated per fixed-size chunk.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunk_sum = |c: usize| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    };
    let chunks = n.div_ceil(REDUCE_CHUNK);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let partial: Vec<f64> = (0..chunks).into_par_iter().map(chunk_sum).collect();
        partial.iter().sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks).map(chunk_sum).sum()
    }
}

/// Dot product with a thread-count independent summation order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_indexed(a.len(), |i| a[i] * b[i])
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        y.par_iter_mut().zip(x.par_iter()).for_each(|(y, x)| *y += alpha * x);
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (y, x) in y.iter_mut().zip(x) {
            *y += alpha * x;
        }
    }
}

/// `y = x + beta * y`
pub fn xpby(x: &[f64], beta: f64, y: &mut [f64]) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        y.par_iter_mut().zip(x.par_iter()).for_each(|(y, x)| *y = x + beta * *y);
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (y, x) in y.iter_mut().zip(x) {
            *y = x + beta * *y;
        }
    }
}

/// Apply `f` to every element of a slice in place.
pub fn map_inplace<F>(v: &mut [f64], f: F)
where
    F: Fn(usize, f64) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        v.par_iter_mut().enumerate().for_each(|(i, x)| *x = f(i, *x));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, x) in v.iter_mut().enumerate() {
            *x = f(i, *x);
        }
    }
}

/// Runs `kernel(offset, chunks)` over aligned chunks of equal-length mutable
/// slices and sums the `K` partial results in chunk order, so the outcome does
/// not depend on the thread count. `offset` is the global index of the chunk start.
pub fn chunked_mut<const M: usize, const K: usize, F>(slices: [&mut [f64]; M], kernel: F) -> [f64; K]
where
    F: Fn(usize, &mut [&mut [f64]; M]) -> [f64; K] + Sync + Send,
{
    let n = slices.first().map_or(0, |s| s.len());
    assert!(slices.iter().all(|s| s.len() == n), "slices differ in length");
    let mut iters: Vec<_> = slices.into_iter().map(|s| s.chunks_mut(REDUCE_CHUNK)).collect();
    let mut parts: Vec<[&mut [f64]; M]> = (0..n.div_ceil(REDUCE_CHUNK))
        .map(|_| std::array::from_fn(|m| iters[m].next().expect("aligned chunks")))
        .collect();
    #[cfg(feature = "parallel")]
    let partial: Vec<[f64; K]> = {
        use rayon::prelude::*;
        parts
            .par_iter_mut()
            .enumerate()
            .map(|(c, p)| kernel(c * REDUCE_CHUNK, p))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<[f64; K]> = parts
        .iter_mut()
        .enumerate()
        .map(|(c, p)| kernel(c * REDUCE_CHUNK, p))
        .collect();
    let mut total = [0.0; K];
    for p in partial {
        for k in 0..K {
            total[k] += p[k];
        }
    }
    total
}

/// Map a list of independent jobs, in parallel when available. Output order
/// follows input order.
pub fn map_jobs<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
