//! Subset dynamic programs shared by the welfare maximizers.

use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::rational::Rational;

/// Scales rationals to a common denominator when every result fits in `i128`.
pub(crate) fn to_integers<'a, I>(rows: I) -> Option<(Vec<Vec<i128>>, BigInt)>
where
    I: IntoIterator<Item = &'a [Rational]> + Clone,
{
    let mut denom = BigInt::one();
    for row in rows.clone() {
        for v in row {
            denom = num_integer::Integer::lcm(&denom, v.denom());
        }
    }
    // Leave headroom for sums over many bidders.
    let limit = BigInt::from(i128::MAX >> 16);
    let mut out = Vec::new();
    for row in rows {
        let mut r = Vec::with_capacity(row.len());
        for v in row {
            let scaled = v.numer() * (&denom / v.denom());
            if scaled.abs() > limit {
                return None;
            }
            r.push(i128::try_from(scaled).ok()?);
        }
        out.push(r);
    }
    Some((out, denom))
}

/// Best `Σ_j values[j][fixed[j] | T_j]` over partitions `{T_j}` of the items in
/// `0..width` not already fixed. `values[j]` is indexed by local bitmask.
pub(crate) fn best_partition<W>(values: &[Vec<W>], width: usize, fixed: &[usize]) -> W
where
    W: Clone + Ord + Add<Output = W>,
{
    let all = (1usize << width) - 1;
    let taken = fixed.iter().fold(0, |acc, f| acc | f);
    let free = all & !taken;
    // best[r] for r ⊆ free: optimum of the bidders so far on exactly the free items r.
    let mut best: Vec<Option<W>> = vec![None; 1 << width];
    for (j, row) in values.iter().enumerate() {
        let mut next: Vec<Option<W>> = vec![None; 1 << width];
        let mut r = free;
        loop {
            let mut t = r;
            loop {
                let prev = if j == 0 {
                    (r == t).then(|| None)
                } else {
                    best[r & !t].clone().map(Some)
                };
                if let Some(prev) = prev {
                    let own = row[fixed[j] | t].clone();
                    let cand = match prev {
                        Some(p) => p + own,
                        None => own,
                    };
                    if next[r].as_ref().is_none_or(|c| cand > *c) {
                        next[r] = Some(cand);
                    }
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & r;
            }
            if r == 0 {
                break;
            }
            r = (r - 1) & free;
        }
        best = next;
    }
    best[free].clone().expect("at least one bidder")
}

/// [`best_partition`] over rationals, through `i128` whenever possible.
pub(crate) fn best_partition_exact(values: &[Vec<Rational>], width: usize, fixed: &[usize]) -> Rational {
    if let Some((ints, denom)) = to_integers(values.iter().map(Vec::as_slice)) {
        return Rational::new(BigInt::from(best_partition(&ints, width, fixed)), denom);
    }
    best_partition(values, width, fixed)
}
