//! Small numeric helpers shared across modules.

use rayon::prelude::*;

/// Compensated (Neumaier) summation in iteration order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Chunk length for parallel reductions. Fixed so that partial sums, and
/// therefore results, do not depend on the worker count.
pub(crate) const REDUCE_CHUNK: usize = 4096;

/// Deterministic parallel sum of `f(i)` for `i in 0..len`.
pub(crate) fn par_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = len.div_ceil(REDUCE_CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(len);
            neumaier_sum((lo..hi).map(&f))
        })
        .collect();
    neumaier_sum(partials)
}

pub(crate) fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(neumaier_sum(v), 1.0);
    }

    #[test]
    fn par_sum_matches_sequential() {
        let f = |i: usize| (i as f64).sin();
        let seq = neumaier_sum((0..100_003).map(f));
        assert!((par_sum(100_003, f) - seq).abs() < 1e-9);
    }
}
