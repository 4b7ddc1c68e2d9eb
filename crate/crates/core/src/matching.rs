//! Maximum-weight bipartite matching over exact rationals.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

/// Maximum total weight of a matching between rows and columns.
///
/// Weights must be nonnegative; a row may stay unmatched. Returns the optimum
/// and, per row, the matched column. Rows matched only through zero-weight
/// edges are reported as unmatched.
pub fn max_weight_matching(weights: &[Vec<Rational>]) -> (Rational, Vec<Option<usize>>) {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (Rational::zero(), vec![None; rows]);
    }
    debug_assert!(weights.iter().all(|r| r.len() == cols && r.iter().all(|w| !w.is_negative())));
    let size = rows.max(cols);
    let top = weights
        .iter()
        .flatten()
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    // Minimize top - w over a square matrix padded with zero-weight cells.
    let cost = |i: usize, j: usize| -> Rational {
        if i < rows && j < cols {
            &top - &weights[i][j]
        } else {
            top.clone()
        }
    };

    // Hungarian algorithm with potentials, 1-based with a virtual column 0.
    let mut u = vec![Rational::zero(); size + 1];
    let mut v = vec![Rational::zero(); size + 1];
    let mut owner = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for i in 1..=size {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<Rational>> = vec![None; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<Rational> = None;
            let mut j1 = 0usize;
            for j in 1..=size {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - &u[i0] - &v[j];
                if minv[j].as_ref().is_none_or(|m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("set above");
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=size {
                if used[j] {
                    u[owner[j]] += &delta;
                    v[j] -= &delta;
                } else if let Some(m) = minv[j].as_mut() {
                    *m -= &delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    let mut total = Rational::zero();
    for j in 1..=size {
        let i = owner[j];
        if i >= 1 && i <= rows && j <= cols && !weights[i - 1][j - 1].is_zero() {
            assignment[i - 1] = Some(j - 1);
            total += &weights[i - 1][j - 1];
        }
    }
    (total, assignment)
}
