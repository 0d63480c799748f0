//! Order-stable data-parallel map with a sequential fallback.
//!
//! All parallelism in the crate funnels through [`map_ordered`]: a pure map
//! over a slice whose output order matches the input order. Reductions that
//! follow (gradient sums, CSV row emission) are performed sequentially over
//! the ordered results, so the parallel and sequential builds produce
//! bitwise-identical numbers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order. Runs on the rayon pool when the
/// `parallel` feature is enabled.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential variant, kept available under both builds so benchmarks can
/// compare the two paths in a single run.
pub fn map_ordered_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| x.wrapping_mul(0x9e37_79b9).rotate_left(13);
        assert_eq!(map_ordered(&xs, f), map_ordered_seq(&xs, f));
    }
}
