//! Deterministic instance generators for sweeps, tests and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{all_bundles, combinations, Bundle};
use crate::error::Result;
use crate::rational::{frac, int, Rational};
use crate::shattering::{all_functions, FunctionClass, GroundPair, Label};
use crate::valuations::{Valuation, ValueTable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly random subset of the `n^m` functions, each kept with probability 1/2.
pub fn random_class(m: usize, n: usize, rng: &mut impl Rng) -> FunctionClass {
    let ground = GroundPair { points: m, labels: n };
    FunctionClass::from_rows_dedup(ground, all_functions(m, n).filter(|_| rng.gen_bool(0.5)))
}

/// A random class of a random target size, so sparse and dense classes both appear.
pub fn random_class_sized(m: usize, n: usize, rng: &mut impl Rng) -> FunctionClass {
    let total = n.pow(m as u32);
    let size = rng.gen_range(0..=total);
    let mut rows: Vec<Vec<Label>> = all_functions(m, n).collect();
    rows.shuffle(rng);
    rows.truncate(size);
    FunctionClass::from_rows_dedup(GroundPair { points: m, labels: n }, rows)
}

/// Every nonempty bundle of at most `k` items, in order of size then lexicographically.
pub fn small_bundles(m: usize, k: usize) -> Vec<Bundle> {
    (1..=k.min(m)).flat_map(|s| combinations(m, s)).collect()
}

/// Calls `f` on every tuple of `n` indices into `0..choices`, last index fastest.
pub fn for_each_tuple(choices: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if choices == 0 && n > 0 {
        return;
    }
    let mut idx = vec![0usize; n];
    loop {
        f(&idx);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Like [`for_each_tuple`] but only nondecreasing tuples (multisets).
pub fn for_each_multiset(choices: usize, n: usize, mut f: impl FnMut(&[usize])) {
    fn go(choices: usize, start: usize, cur: &mut Vec<usize>, n: usize, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == n {
            f(cur);
            return;
        }
        for c in start..choices {
            cur.push(c);
            go(choices, c, cur, n, f);
            cur.pop();
        }
    }
    go(choices, 0, &mut Vec::with_capacity(n), n, &mut f);
}

/// Single-minded profiles where bidders want pairwise distinct single items or nothing.
pub fn disjoint_singleton_profiles(m: usize, n: usize) -> Vec<Vec<Valuation>> {
    let mut out = Vec::new();
    // Symbol m means "wants nothing".
    for_each_tuple(m + 1, n, |t| {
        let wanted: Vec<usize> = t.iter().copied().filter(|&x| x < m).collect();
        let mut dedup = wanted.clone();
        dedup.sort_unstable();
        dedup.dedup();
        if dedup.len() != wanted.len() {
            return;
        }
        out.push(
            t.iter()
                .map(|&x| {
                    if x < m {
                        Valuation::single_minded(m, Bundle::singleton(x))
                    } else {
                        Valuation::zero(m)
                    }
                    .expect("valid fixture")
                })
                .collect(),
        );
    });
    out
}

/// A monotone normalized table `g` on the subsets of `core`, values in `0..=top`.
fn random_monotone_on(core: &[usize], top: i64, rng: &mut impl Rng) -> Vec<i64> {
    let k = core.len();
    let mut g = vec![0i64; 1 << k];
    for mask in 1..1usize << k {
        let floor = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| g[mask & !(1 << b)]).max().unwrap_or(0);
        g[mask] = floor + if rng.gen_bool(0.5) { rng.gen_range(0..=top) } else { 0 };
    }
    g
}

/// A random k-local table: a monotone function of `S ∩ T` plus a tail small
/// enough to stay within the locality slack.
pub fn random_k_local(m: usize, k: usize, rng: &mut impl Rng) -> Valuation {
    let mut items: Vec<usize> = (0..m).collect();
    items.shuffle(rng);
    let core: Vec<usize> = items[..k.min(m)].to_vec();
    let mut g = random_monotone_on(&core, 3, rng);
    if g.iter().all(|&v| v == 0) {
        let last = g.len() - 1;
        g[last] = 1;
    }
    let local = |s: Bundle| -> usize {
        core.iter().enumerate().filter(|(_, &x)| s.contains(x)).map(|(i, _)| 1 << i).sum()
    };
    let top = *g.last().expect("nonempty");
    // v(S) - v(S ∩ T) = c |S \ T| <= c m <= v([m]) / (2m^2) needs c <= g(T) / (2 m^3).
    let with_tail = rng.gen_bool(0.5);
    let c = if with_tail { frac(top, 2 * (m as i64).pow(3)) } else { int(0) };
    let core_mask = Bundle::from_items(core.iter().copied());
    let values = all_bundles(m)
        .map(|s| int(g[local(s)]) + &c * int(s.difference(core_mask).len() as i64))
        .collect();
    Valuation::explicit_table(m, values, true).expect("monotone by construction")
}

/// Subadditive closure of a random monotone `g`: `v(S) = min` over partitions of `S` of `Σ g`.
pub fn random_subadditive(m: usize, rng: &mut impl Rng) -> Valuation {
    let items: Vec<usize> = (0..m).collect();
    let g = random_monotone_on(&items, 3, rng);
    let mut v = g.clone();
    for mask in 1..1usize << m {
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            v[mask] = v[mask].min(v[sub] + v[mask & !sub]);
            sub = (sub - 1) & mask;
        }
    }
    Valuation::explicit_table(m, v.into_iter().map(int).collect(), true).expect("monotone closure")
}

/// A catalog of XOS valuations over `m` items with small integer clauses.
pub fn xos_catalog(m: usize) -> Vec<Valuation> {
    let mut out = Vec::new();
    let unit = |x: usize, w: i64| -> Vec<Rational> { (0..m).map(|y| int(if y == x { w } else { 0 })).collect() };
    out.push(Valuation::xos(m, vec![vec![int(0); m]]).expect("valid"));
    out.push(Valuation::xos(m, vec![vec![int(1); m]]).expect("valid"));
    // Unit demand with rising item weights.
    out.push(Valuation::xos(m, (0..m).map(|x| unit(x, 1 + x as i64)).collect()).expect("valid"));
    out.push(Valuation::xos(m, (0..m).map(|x| unit(x, 1)).collect()).expect("valid"));
    for x in 0..m {
        out.push(Valuation::xos(m, vec![unit(x, 2)]).expect("valid"));
    }
    // Two halves as competing clauses.
    let half = |lo: bool, w: i64| -> Vec<Rational> {
        (0..m).map(|y| int(if (y < m.div_ceil(2)) == lo { w } else { 0 })).collect()
    };
    out.push(Valuation::xos(m, vec![half(true, 2), half(false, 2)]).expect("valid"));
    out.push(Valuation::xos(m, vec![half(true, 3), vec![int(1); m]]).expect("valid"));
    out.push(Valuation::xos(m, vec![half(false, 1), unit(0, 3)]).expect("valid"));
    out
}

/// A seeded random XOS valuation with 1..=3 clauses and weights in `0..=3`.
pub fn random_xos(m: usize, rng: &mut impl Rng) -> Valuation {
    let clauses = rng.gen_range(1..=3);
    let cs = (0..clauses)
        .map(|_| (0..m).map(|_| int(rng.gen_range(0..=3))).collect())
        .collect();
    Valuation::xos(m, cs).expect("valid")
}

/// A monotone explicit table with values on the grid `{0, 1/2, ..., top/2}`.
pub fn random_grid_table(m: usize, top: i64, rng: &mut impl Rng) -> Valuation {
    let items: Vec<usize> = (0..m).collect();
    let g = random_monotone_on(&items, top, rng);
    Valuation::explicit_table(m, g.into_iter().map(|v| frac(v, 2)).collect(), true).expect("monotone")
}

/// At least `size` alternative reports over `m` items with pairwise different
/// value tables: scaled single-minded bids plus seeded additive and grid tables.
pub fn deviation_grid(m: usize, size: usize, seed: u64) -> Vec<Valuation> {
    let mut r = rng(seed);
    let mut out: Vec<Valuation> = Vec::new();
    let mut tables: Vec<ValueTable> = Vec::new();
    let mut push = |v: Valuation, out: &mut Vec<Valuation>| {
        let t = ValueTable::of(&v).expect("small m");
        if !tables.contains(&t) {
            tables.push(t);
            out.push(v);
        }
    };
    push(Valuation::zero(m).expect("valid"), &mut out);
    let bundles = (1usize << m) - 1;
    let scales = (size - 1).div_ceil(bundles).max(1);
    for t in all_bundles(m).skip(1) {
        for j in 1..=scales as i64 {
            let c = frac(j, 2);
            let values = all_bundles(m).map(|s| if t.is_subset_of(s) { c.clone() } else { int(0) }).collect();
            push(Valuation::explicit_table(m, values, true).expect("monotone"), &mut out);
        }
    }
    for _ in 0..size / 5 {
        let v = if r.gen_bool(0.5) {
            Valuation::additive((0..m).map(|_| frac(r.gen_range(0..=8), 2)).collect()).expect("valid")
        } else {
            random_grid_table(m, 8, &mut r)
        };
        push(v, &mut out);
    }
    out
}

/// Single-minded valuations on every bundle of size `1..=k`, each wrapped as an instance profile.
pub fn single_minded_menu(m: usize, k: usize) -> Result<Vec<Valuation>> {
    small_bundles(m, k).into_iter().map(|t| Valuation::single_minded(m, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuations::{is_k_local, is_monotone, is_subadditive, is_xos};

    #[test]
    fn tuples_and_multisets() {
        let mut n = 0;
        for_each_tuple(3, 2, |_| n += 1);
        assert_eq!(n, 9);
        let mut seen = Vec::new();
        for_each_multiset(3, 2, |t| seen.push(t.to_vec()));
        assert_eq!(seen.len(), 6);
        assert!(seen.iter().all(|t| t[0] <= t[1]));
    }

    #[test]
    fn disjoint_singletons() {
        let p = disjoint_singleton_profiles(2, 2);
        // (a,b) over {0,1,none}^2 minus the two repeats.
        assert_eq!(p.len(), 7);
    }

    #[test]
    fn generators_respect_their_classes() {
        let mut r = rng(7);
        for m in 1..=5 {
            for k in 1..=m.min(3) {
                for _ in 0..20 {
                    let v = random_k_local(m, k, &mut r);
                    assert!(is_k_local(&v, k).unwrap(), "m={m} k={k}");
                    assert!(is_monotone(&v).unwrap());
                }
            }
            for _ in 0..20 {
                let v = random_subadditive(m, &mut r);
                assert!(is_subadditive(&v).unwrap());
                assert!(is_monotone(&v).unwrap());
            }
        }
        for m in 1..=4 {
            for v in xos_catalog(m) {
                assert!(is_xos(&v).unwrap());
            }
        }
    }

    #[test]
    fn deviation_grid_is_large_and_distinct() {
        for m in 1..=4 {
            let g = deviation_grid(m, 50, 3);
            assert!(g.len() >= 50, "m={m}");
            let tables: Vec<_> = g.iter().map(|v| ValueTable::of(v).unwrap()).collect();
            for (i, t) in tables.iter().enumerate() {
                assert!(!tables[..i].contains(t));
            }
            assert_eq!(g, deviation_grid(m, 50, 3));
        }
    }
}
