//! Deterministic pairwise summation.
//!
//! Every reduction in the crate goes through these helpers. The split points
//! depend only on the length of the index range, so the floating-point result
//! is identical for any number of worker threads.

const LEAF: usize = 32;
const PARALLEL_MIN: usize = 1 << 12;

/// Pairwise sum of a slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    sum_seq(0, values.len(), &|i| values[i])
}

/// Pairwise sum of `term(i)` for `i in 0..len`, evaluated in parallel for
/// large ranges. `term` must be pure.
pub fn pairwise_sum_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_par(0, len, &term)
}

/// Sequential pairwise sum of `term(i)` for `i in 0..len`. Same tree shape as
/// [`pairwise_sum_by`], so both give bit-identical results.
pub fn pairwise_sum_seq_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64,
{
    sum_seq(0, len, &term)
}

fn sum_seq<F: Fn(usize) -> f64>(lo: usize, hi: usize, term: &F) -> f64 {
    let len = hi - lo;
    if len <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        return acc;
    }
    let mid = lo + len / 2;
    sum_seq(lo, mid, term) + sum_seq(mid, hi, term)
}

fn sum_par<F: Fn(usize) -> f64 + Sync>(lo: usize, hi: usize, term: &F) -> f64 {
    let len = hi - lo;
    if len < PARALLEL_MIN {
        return sum_seq(lo, hi, term);
    }
    let mid = lo + len / 2;
    let (a, b) = rayon::join(|| sum_par(lo, mid, term), || sum_par(mid, hi, term));
    a + b
}
