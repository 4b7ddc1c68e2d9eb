//! Dense tableau simplex over exact rationals, Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Maximizes `c·x` subject to `A x <= b`, `x >= 0`, for `b >= 0`.
///
/// Returns `None` if the objective is unbounded. The origin is feasible
/// because `b >= 0`, so no phase one is needed.
pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Option<Rational> {
    let vars = c.len();
    let rows = a.len();
    assert_eq!(b.len(), rows);
    assert!(b.iter().all(|v| !v.is_negative()), "right-hand side must be nonnegative");

    // Columns: structural 0..vars, slacks vars..vars+rows, rhs last.
    let width = vars + rows + 1;
    let mut t: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, rhs))| {
            let mut r = vec![Rational::zero(); width];
            r[..vars].clone_from_slice(row);
            r[vars + i] = Rational::one();
            r[width - 1] = rhs.clone();
            r
        })
        .collect();
    // Reduced costs stored as -c; optimal when all are >= 0.
    let mut obj: Vec<Rational> = vec![Rational::zero(); width];
    for (j, cj) in c.iter().enumerate() {
        obj[j] = -cj.clone();
    }
    let mut basis: Vec<usize> = (vars..vars + rows).collect();

    loop {
        let Some(enter) = (0..width - 1).find(|&j| obj[j].is_negative()) else {
            return Some(obj[width - 1].clone());
        };
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[width - 1] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (pr, _) = leave?;
        let pivot = t[pr][enter].clone();
        for v in t[pr].iter_mut() {
            *v /= &pivot;
        }
        let prow = t[pr].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != pr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= &f * p;
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for (v, p) in obj.iter_mut().zip(&prow) {
                *v -= &f * p;
            }
        }
        basis[pr] = enter;
    }
}
