//! Acceptance criteria, one test per criterion. Each test prints a single
//! `criterion N: PASS|FAIL ...` line; run with `--nocapture` to see them.

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;
use std::process::Command;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use kshatter::allocations::{is_index_shattered, is_pair_shattered, AllocationBank, DupAllocation, PairWitness};
use kshatter::banks::{
    full_pair_bank, hy_bank, intersection_family, random_hy, sqrt_bank, trivial_bank, verify_k_wise, PartitionFamily,
};
use kshatter::bundle::{all_bundles, combinations};
use kshatter::fixtures::{
    deviation_grid, disjoint_singleton_profiles, for_each_tuple, random_class, random_class_sized, random_grid_table,
    random_k_local, random_subadditive, rng, single_minded_menu, xos_catalog,
};
use kshatter::mechanisms::{
    greedy_on_instance, mir_allocate, opt_welfare, truthfulness_probe, AuctionInstance, PaymentRule,
};
use kshatter::rational::{frac, int};
use kshatter::reductions::{
    disjointness_to_auction, hypergraph_promise, hypergraph_to_packing, packing_to_auction, DisjointnessInstance,
    Hypergraph, PackingInstance, Promise,
};
use kshatter::shattering::{
    all_functions, dim_k, recursion_bound, sauer_bound, tightness_class, FunctionClass, GroundPair, Label,
};
use kshatter::valuations::{Valuation, ValueTable};
use kshatter::{Budget, Bundle, Rational};

fn report(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed: {detail}");
}

fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `Σ_{i≤d} C(m,i) C(n,k)^i (k-1)^(m-i)`, evaluated directly.
fn sauer_sum(m: usize, n: usize, k: usize, d: usize) -> BigUint {
    let menus = binom(n as u64, k as u64);
    (0..=d.min(m))
        .map(|i| binom(m as u64, i as u64) * menus.pow(i as u32) * BigUint::from(k - 1).pow((m - i) as u32))
        .sum()
}

fn welfare(alloc: &DupAllocation, tables: &[ValueTable]) -> Rational {
    alloc.bundles.iter().zip(tables).map(|(b, t)| t.get(*b).clone()).sum()
}

fn profiles(menu: &[Valuation], n: usize) -> Vec<Vec<Valuation>> {
    let mut out = Vec::new();
    for_each_tuple(menu.len(), n, |t| out.push(t.iter().map(|&i| menu[i].clone()).collect()));
    out
}

/// Largest point set on which the projection has all `2^|A|` patterns.
fn vc_oracle(rows: &[Vec<Label>], m: usize) -> usize {
    let mut best = 0;
    for mask in 0..1usize << m {
        let pts: Vec<usize> = (0..m).filter(|p| mask >> p & 1 == 1).collect();
        let patterns: HashSet<Vec<Label>> = rows.iter().map(|f| pts.iter().map(|&p| f[p]).collect()).collect();
        if !rows.is_empty() && patterns.len() == 1 << pts.len() {
            best = best.max(pts.len());
        }
    }
    best
}

#[test]
fn criterion_01_sauer_bound_holds_on_random_classes() {
    let mut r = rng(1);
    let (mut checked, mut violations) = (0usize, 0usize);
    for m in 1..=5 {
        for n in 2..=4 {
            for k in 2..=n {
                for s in 0..1000 {
                    let class = if s % 2 == 0 {
                        random_class(m, n, &mut r)
                    } else {
                        random_class_sized(m, n, &mut r)
                    };
                    let d = dim_k(&class, k).unwrap();
                    let bound = sauer_bound(m, n, k, d).unwrap();
                    assert_eq!(bound, sauer_sum(m, n, k, d));
                    checked += 1;
                    if BigUint::from(class.len()) > bound {
                        violations += 1;
                    }
                }
            }
        }
    }
    report(1, violations == 0, format!("{checked} classes, {violations} violations"));
}

#[test]
fn criterion_02_closed_form_equals_recursion() {
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for m in 1..=8 {
        for n in 2..=5 {
            for k in 2..=n {
                for d in 0..=m {
                    checked += 1;
                    if sauer_bound(m, n, k, d).unwrap() != recursion_bound(m, n, k, d).unwrap() {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    report(2, mismatches == 0, format!("{checked} grid points, {mismatches} mismatches"));
}

#[test]
fn criterion_03_tightness_at_k_equals_n() {
    let budget = Budget::default();
    let (mut checked, mut bad) = (0usize, Vec::new());
    for m in 1..=5 {
        for n in 2..=4 {
            for d in 0..=m {
                let class = tightness_class(m, n, n, d, &budget).unwrap();
                let size_ok = BigUint::from(class.len()) == sauer_bound(m, n, n, d).unwrap();
                let dim_ok = dim_k(&class, n).unwrap() == d;
                checked += 1;
                if !(size_ok && dim_ok) {
                    bad.push((m, n, d));
                }
            }
        }
    }
    report(3, bad.is_empty(), format!("{checked} grid points, failures {bad:?}"));
}

#[test]
fn criterion_04_k2_dimension_is_classic_vc() {
    let all3: Vec<Vec<Label>> = all_functions(3, 2).collect();
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    let mut compare = |rows: Vec<Vec<Label>>, m: usize| {
        let want = vc_oracle(&rows, m);
        let class = FunctionClass::new(GroundPair::new(m, 2).unwrap(), rows).unwrap();
        checked += 1;
        if dim_k(&class, 2).unwrap() != want {
            mismatches += 1;
        }
    };
    for mask in 0..1u32 << all3.len() {
        let rows = all3.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, f)| f.clone()).collect();
        compare(rows, 3);
    }
    let all4: Vec<Vec<Label>> = all_functions(4, 2).collect();
    let mut r = rng(4);
    for _ in 0..500 {
        let keep: u32 = r.gen();
        let rows = all4.iter().enumerate().filter(|(i, _)| keep >> i & 1 == 1).map(|(_, f)| f.clone()).collect();
        compare(rows, 4);
    }
    report(4, mismatches == 0, format!("{checked} classes, {mismatches} mismatches"));
}

#[test]
fn criterion_05_greedy_is_a_2k_approximation() {
    let budget = Budget::default();
    let mut r = rng(5);
    let (mut checked, mut violations) = (0usize, 0usize);
    let mut check = |vals: Vec<Valuation>, m: usize, k: usize| {
        let inst = AuctionInstance::new(m, 1, vals).unwrap();
        let opt = opt_welfare(&inst, &budget).unwrap();
        let got = greedy_on_instance(&inst, k).unwrap().welfare;
        checked += 1;
        if got * int(2 * k as i64) < opt {
            violations += 1;
        }
    };
    for m in 1..=6 {
        for n in 1..=4 {
            for k in 1..=3 {
                let menu = single_minded_menu(m, k).unwrap();
                for vals in profiles(&menu, n) {
                    check(vals, m, k);
                }
                for _ in 0..200 {
                    let vals = (0..n)
                        .map(|_| {
                            if r.gen_bool(0.5) {
                                menu[r.gen_range(0..menu.len())].clone()
                            } else {
                                random_k_local(m, k, &mut r)
                            }
                        })
                        .collect();
                    check(vals, m, k);
                }
            }
        }
    }
    report(5, violations == 0, format!("{checked} instances, {violations} violations"));
}

#[test]
fn criterion_06_trivial_bank_ratio_is_min_m_n() {
    let budget = Budget::default();
    let mut bad = Vec::new();
    for m in 1..=4 {
        for n in 1..=4 {
            let bank = trivial_bank(m, n).unwrap();
            let mut worst = Rational::zero();
            for vals in disjoint_singleton_profiles(m, n) {
                let wanting = vals.iter().filter(|v| v.value(Bundle::full(m)).unwrap() > int(0)).count();
                let inst = AuctionInstance::new(m, 1, vals).unwrap();
                let opt = opt_welfare(&inst, &budget).unwrap();
                assert_eq!(opt, int(wanting as i64));
                let got = mir_allocate(&bank, &inst).unwrap().welfare(&inst.tables().unwrap());
                if !opt.is_zero() {
                    worst = worst.max(opt / got);
                }
            }
            if worst != int(m.min(n) as i64) {
                bad.push((m, n, worst.to_string()));
            }
        }
    }
    report(6, bad.is_empty(), format!("16 grounds, mismatches {bad:?}"));
}

/// Lex-first maximizer over assignment vectors, bidders before "unassigned".
fn sqrt_oracle(bank: &AllocationBank, tables: &[ValueTable], m: usize, n: usize) -> (DupAllocation, Rational) {
    let mut best: Option<(DupAllocation, Rational)> = None;
    for_each_tuple(n + 1, m, |t| {
        let mut bundles = vec![Bundle::EMPTY; n];
        for (x, &y) in t.iter().enumerate() {
            if y < n {
                bundles[y] = bundles[y].with(x);
            }
        }
        let a = DupAllocation::new(bundles);
        if bank.contains(&a) {
            let w = welfare(&a, tables);
            if best.as_ref().is_none_or(|(_, bw)| w > *bw) {
                best = Some((a, w));
            }
        }
    });
    best.expect("banks are nonempty")
}

fn ceil_sqrt(m: usize) -> i64 {
    (1..).find(|c: &i64| c * c >= m as i64).unwrap()
}

#[test]
fn criterion_07_sqrt_bank_claims() {
    let budget = Budget::default();
    let mut r = rng(7);
    let mut argmax_bad = 0usize;
    let mut argmax_checked = 0usize;
    for m in 1..=4 {
        for n in 1..=4 {
            let bank = sqrt_bank(m, n).unwrap();
            for _ in 0..40 {
                let tables: Vec<ValueTable> = (0..n)
                    .map(|_| ValueTable::of(&random_grid_table(m, 2, &mut r)).unwrap())
                    .collect();
                argmax_checked += 1;
                if bank.argmax_welfare(&tables).unwrap() != sqrt_oracle(&bank, &tables, m, n) {
                    argmax_bad += 1;
                }
            }
        }
    }
    let mut shattered = Vec::new();
    for m in 3..=6 {
        for n in 1..=3 {
            let bank = sqrt_bank(m, n).unwrap();
            for size in 3..=m {
                for s in combinations(m, size) {
                    for a in 0..n {
                        if is_index_shattered(&bank, s, a, &budget).unwrap() {
                            shattered.push((m, n, s, a));
                        }
                    }
                }
            }
        }
    }
    let mut ratio_bad = Vec::new();
    let mut instances = 0usize;
    for m in 1..=6 {
        let cap = int(ceil_sqrt(m));
        for n in 1..=3 {
            let bank = sqrt_bank(m, n).unwrap();
            let zero_one: Vec<Valuation> = all_bundles(m)
                .map(|b| Valuation::zero_one_additive(m, b).unwrap())
                .collect();
            let mut run = |vals: Vec<Valuation>| {
                let inst = AuctionInstance::new(m, 1, vals).unwrap();
                let opt = opt_welfare(&inst, &budget).unwrap();
                let got = mir_allocate(&bank, &inst).unwrap().welfare(&inst.tables().unwrap());
                instances += 1;
                if opt > &got * &cap {
                    ratio_bad.push((m, n, opt.to_string(), got.to_string()));
                }
            };
            for vals in profiles(&zero_one, n) {
                run(vals);
            }
            for _ in 0..200 {
                run((0..n).map(|_| random_subadditive(m, &mut r)).collect());
            }
        }
    }
    let ok = argmax_bad == 0 && shattered.is_empty() && ratio_bad.is_empty();
    report(
        7,
        ok,
        format!(
            "argmax {argmax_bad}/{argmax_checked} mismatches; {} index-shattered sets; {instances} ratio instances, {} over ceil(sqrt m)",
            shattered.len(),
            ratio_bad.len()
        ),
    );
}

#[test]
fn criterion_08_hy_bank_claims() {
    let budget = Budget::default();
    let mut r = rng(8);
    let mut instances = 0usize;
    let mut xos_bad = Vec::new();
    for m in 1..=4 {
        let catalog = xos_catalog(m);
        for (n, l) in [(2usize, 2usize), (4, 2), (4, 4)] {
            for seed in 0..2u64 {
                let bank = hy_bank(random_hy(m, n, l, seed).unwrap()).unwrap();
                let cap = frac(l as i64, l as i64 - 1);
                for vals in profiles(&catalog, n) {
                    let inst = AuctionInstance::new(m, 1, vals).unwrap();
                    let opt = opt_welfare(&inst, &budget).unwrap();
                    let got = mir_allocate(&bank, &inst).unwrap().welfare(&inst.tables().unwrap());
                    instances += 1;
                    if opt > &got * &cap {
                        xos_bad.push((m, n, l, seed));
                    }
                }
            }
        }
    }
    let mut sub_bad = Vec::new();
    for m in 1..=4 {
        for n in [2usize, 4] {
            for seed in 0..3u64 {
                let bank = hy_bank(random_hy(m, n, 2, seed).unwrap()).unwrap();
                for _ in 0..150 {
                    let vals = (0..n).map(|_| random_subadditive(m, &mut r)).collect();
                    let inst = AuctionInstance::new(m, 1, vals).unwrap();
                    let opt = opt_welfare(&inst, &budget).unwrap();
                    let got = mir_allocate(&bank, &inst).unwrap().welfare(&inst.tables().unwrap());
                    instances += 1;
                    if opt > got * int(2) {
                        sub_bad.push((m, n, seed));
                    }
                }
            }
        }
    }
    let (mut bad_point_cases, mut implication_bad) = (0usize, 0usize);
    for seed in 0..200u64 {
        let (m, n, l) = [(4, 4, 2), (3, 6, 3), (4, 6, 2), (3, 4, 4)][seed as usize % 4];
        let table = random_hy(m, n, l, 1000 + seed).unwrap();
        let bank = hy_bank(table.clone()).unwrap();
        for s in all_bundles(m).skip(1) {
            for a_mask in 1..1usize << n {
                let a: Vec<usize> = (0..n).filter(|y| a_mask >> y & 1 == 1).collect();
                if table.bad_points(s, &a).len() >= l {
                    bad_point_cases += 1;
                    if is_pair_shattered(&bank, s, &a, &budget).unwrap() {
                        implication_bad += 1;
                    }
                }
            }
        }
    }
    let ok = xos_bad.is_empty() && sub_bad.is_empty() && implication_bad == 0 && bad_point_cases > 0;
    report(
        8,
        ok,
        format!(
            "{instances} ratio instances ({} XOS, {} subadditive over bound); bad-point implication {implication_bad}/{bad_point_cases} violated",
            xos_bad.len(),
            sub_bad.len()
        ),
    );
}

#[test]
fn criterion_09_mir_vcg_truthfulness() {
    let mut probes = 0usize;
    let mut failures = Vec::new();
    let mut control_caught = 0usize;
    let mut r = rng(9);
    for m in 1..=4 {
        let devs = deviation_grid(m, 50, 90 + m as u64);
        assert!(devs.len() >= 50);
        for n in 1..=3 {
            let everyone: Vec<usize> = (0..n).collect();
            let banks = [
                ("trivial", trivial_bank(m, n).unwrap()),
                ("sqrt", sqrt_bank(m, n).unwrap()),
                ("full-pair", full_pair_bank(m, n, Bundle::full(m), &everyone).unwrap()),
            ];
            for (name, bank) in &banks {
                for _ in 0..10 {
                    let vals = (0..n).map(|_| devs[r.gen_range(0..devs.len())].clone()).collect();
                    let inst = AuctionInstance::new(m, 1, vals).unwrap();
                    for i in 0..n {
                        let p = truthfulness_probe(bank, &inst, i, &devs, PaymentRule::Clarke).unwrap();
                        probes += 1;
                        if !p.truthful {
                            failures.push((*name, m, n, i, p.violation));
                        }
                        let c = truthfulness_probe(bank, &inst, i, &devs, PaymentRule::WithoutCredit).unwrap();
                        if !c.truthful {
                            control_caught += 1;
                        }
                    }
                }
            }
        }
    }
    let ok = failures.is_empty() && control_caught > 0;
    report(
        9,
        ok,
        format!(
            "{probes} Clarke probes with {} failures; corrupted payments caught on {control_caught} probes",
            failures.len()
        ),
    );
}

fn planted(m: usize, n: usize) -> (AllocationBank, PairWitness) {
    let a: Vec<usize> = (0..n).collect();
    (
        full_pair_bank(m, n, Bundle::full(m), &a).unwrap(),
        PairWitness { items: Bundle::full(m), bidders: a },
    )
}

/// Backtracking over set choices: can `c` sets be picked covering no element twice?
fn packs(sets: &[Bundle], c: usize, used: Bundle) -> bool {
    if c == 0 {
        return true;
    }
    (0..sets.len()).any(|i| sets[i].is_disjoint(used) && packs(&sets[i + 1..], c - 1, used.union(sets[i])))
}

/// Can `c` sets be picked covering every element fewer than `k` times?
fn packs_bounded(sets: &[Bundle], c: usize, k: usize, cover: &mut Vec<usize>) -> bool {
    if c == 0 {
        return true;
    }
    for i in 0..sets.len() {
        if sets[i].items().all(|x| cover[x] + 1 < k) {
            sets[i].items().for_each(|x| cover[x] += 1);
            let ok = packs_bounded(&sets[i + 1..], c - 1, k, cover);
            sets[i].items().for_each(|x| cover[x] -= 1);
            if ok {
                return true;
            }
        }
    }
    false
}

#[test]
fn criterion_10_reduction_soundness() {
    let mut r = rng(10);
    let (mut packing_cases, mut graph_cases, mut disj_cases) = (0usize, 0usize, 0usize);
    let mut wrong = Vec::new();
    for _ in 0..600 {
        let universe = r.gen_range(1..=8);
        let count = r.gen_range(2..=4);
        let k = r.gen_range(2..=3);
        let sets: Vec<Bundle> = (0..count)
            .map(|_| Bundle::from_items((0..universe).filter(|_| r.gen_bool(0.35))))
            .collect();
        let c = r.gen_range(1..=count);
        let positive = packs(&sets, c, Bundle::EMPTY);
        let negative = !packs_bounded(&sets, c, k, &mut vec![0; universe]);
        if !(positive || negative) {
            continue;
        }
        let p = PackingInstance::new(universe, sets, c, k).unwrap();
        let (bank, pair) = planted(universe, count);
        let (_, rep) = packing_to_auction(&p, &bank, &pair).unwrap();
        packing_cases += 1;
        if rep.decision != positive {
            wrong.push(format!("packing {p:?}"));
        }
    }
    let mut graphs: Vec<Hypergraph> = Vec::new();
    for vertices in 2..=6 {
        let pairs: Vec<Vec<usize>> = combinations(vertices, 2).map(|b| b.to_vec()).collect();
        for _ in 0..40 {
            let edges: Vec<Vec<usize>> = pairs.iter().filter(|_| r.gen_bool(0.5)).take(8).cloned().collect();
            if !edges.is_empty() {
                graphs.push(Hypergraph { vertices, edges });
            }
        }
        let all: Vec<Vec<usize>> = pairs.iter().take(8).cloned().collect();
        graphs.push(Hypergraph { vertices, edges: all });
    }
    for vertices in 3..=8 {
        let triples: Vec<Vec<usize>> = combinations(vertices, 3).map(|b| b.to_vec()).collect();
        for _ in 0..20 {
            let edges: Vec<Vec<usize>> = triples.iter().filter(|_| r.gen_bool(0.2)).take(8).cloned().collect();
            if !edges.is_empty() {
                graphs.push(Hypergraph { vertices, edges });
            }
        }
    }
    for g in &graphs {
        let k = g.edges[0].len();
        let c = g.vertices.div_ceil(2 * k);
        let masks: Vec<Bundle> = g.edges.iter().map(|e| Bundle::from_items(e.iter().copied())).collect();
        let positive = (c..=g.vertices)
            .any(|s| combinations(g.vertices, s).any(|v| masks.iter().all(|e| e.intersection(v).len() <= 1)));
        let negative = combinations(g.vertices, c).all(|v| masks.iter().any(|e| e.is_subset_of(v)));
        assert_eq!(
            hypergraph_promise(g).unwrap(),
            if positive { Promise::Positive } else if negative { Promise::Negative } else { Promise::Outside }
        );
        if !(positive || negative) {
            continue;
        }
        let p = hypergraph_to_packing(g).unwrap();
        let (bank, pair) = planted(p.universe, p.sets.len());
        let (_, rep) = packing_to_auction(&p, &bank, &pair).unwrap();
        graph_cases += 1;
        if rep.decision != positive {
            wrong.push(format!("hypergraph {g:?}"));
        }
    }
    let antichain = PartitionFamily::new(
        4,
        2,
        combinations(4, 2).map(|a| vec![a, Bundle::full(4).difference(a)]).collect(),
    )
    .unwrap();
    let single = PartitionFamily::new(
        6,
        3,
        vec![vec![Bundle::from_items([0, 1]), Bundle::from_items([2, 3]), Bundle::from_items([4, 5])]],
    )
    .unwrap();
    for (fam, t) in [(antichain, 6usize), (single, 1)] {
        let k = fam.parts;
        let (bank, pair) = planted(fam.universe, k);
        let subsets = 1usize << t;
        for_each_tuple(subsets, k, |choice| {
            let sets: Vec<BTreeSet<usize>> =
                choice.iter().map(|&mask| (0..t).filter(|s| mask >> s & 1 == 1).collect()).collect();
            let common = (0..t).any(|s| sets.iter().all(|a| a.contains(&s)));
            let disjoint = (0..t).all(|s| sets.iter().filter(|a| a.contains(&s)).count() <= 1);
            if !(common || disjoint) {
                return;
            }
            let di = DisjointnessInstance::new(t, sets).unwrap();
            let (_, rep) = disjointness_to_auction(&di, &fam, &bank, &pair).unwrap();
            disj_cases += 1;
            let ok = if common {
                rep.decision
            } else {
                !rep.decision && rep.welfare <= int(k as i64 - 1)
            };
            if !ok {
                wrong.push(format!("disjointness {di:?}"));
            }
        });
    }
    report(
        10,
        wrong.is_empty() && packing_cases > 0 && graph_cases > 0,
        format!(
            "{packing_cases} packing, {graph_cases} hypergraph, {disj_cases} disjointness promise fixtures; {} wrong {:?}",
            wrong.len(),
            wrong.first()
        ),
    );
}

/// Direct tuple enumeration: parts intersect unless the indices are all equal.
fn k_wise_oracle(fam: &PartitionFamily) -> bool {
    let (t, k) = (fam.len(), fam.parts);
    let mut ok = true;
    for_each_tuple(t, k, |idx| {
        let inter = idx
            .iter()
            .enumerate()
            .fold(Bundle::full(fam.universe), |acc, (i, &s)| acc.intersection(fam.partitions[s][i]));
        let equal = idx.iter().all(|&s| s == idx[0]);
        if inter.is_empty() != equal {
            ok = false;
        }
    });
    ok
}

fn family_from_labels(x: usize, k: usize, labels: &[usize]) -> PartitionFamily {
    let partitions = labels
        .chunks(x)
        .map(|row| (0..k).map(|i| Bundle::from_items((0..x).filter(|&e| row[e] == i))).collect())
        .collect();
    PartitionFamily::new(x, k, partitions).unwrap()
}

#[test]
fn criterion_11_k_wise_intersection_family() {
    let (mut checked, mut mismatches, mut positives) = (0usize, 0usize, 0usize);
    let mut r = rng(11);
    for k in 2..=3usize {
        for t in 1..=5usize {
            for x in 1..=6usize {
                let total = (k as u128).pow((x * t) as u32);
                let mut check = |labels: &[usize]| {
                    let fam = family_from_labels(x, k, labels);
                    let want = k_wise_oracle(&fam);
                    checked += 1;
                    positives += want as usize;
                    if verify_k_wise(&fam) != want {
                        mismatches += 1;
                    }
                };
                if total <= 60_000 {
                    for_each_tuple(k, x * t, |labels| check(labels));
                } else {
                    for _ in 0..2000 {
                        let labels: Vec<usize> = (0..x * t).map(|_| r.gen_range(0..k)).collect();
                        check(&labels);
                    }
                }
            }
        }
    }
    let t = (4f64).exp().floor() as usize;
    let mut built = Vec::new();
    for seed in 0..10u64 {
        match intersection_family(32, 2, t, seed, 100) {
            Ok(s) => {
                assert!(k_wise_oracle(&s.family));
                built.push(s.attempts);
            }
            Err(e) => println!("seed {seed}: {e}"),
        }
    }
    let ok = mismatches == 0 && positives > 0 && built.len() == 10;
    report(
        11,
        ok,
        format!(
            "{checked} families ({positives} k-wise), {mismatches} mismatches; t={t} at |X|=32 built for {}/10 seeds, attempts {built:?}",
            built.len()
        ),
    );
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn criterion_12_cli_output_is_deterministic() {
    let runs: Vec<Vec<String>> = [
        vec!["dim", &fixture("full_class.json"), "-k", "2"],
        vec!["dim", &fixture("constants.json"), "--format", "csv"],
        vec!["bound", "5", "4", "3", "2", "--recursion"],
        vec!["shatter", &fixture("full_pair_4x3.json"), "--size-s", "3", "--size-a", "2"],
        vec!["simulate", &fixture("trivial_bank.json"), &fixture("two_bidders.json")],
        vec!["menu", &fixture("full_pair_2x2.json"), &fixture("menu_instance.json"), "--bidder", "1"],
        vec!["ratio", "--greedy", "2", "--gen", "k-local:m=4,n=3,k=2,count=40", "--seed", "7", "--rows"],
        vec!["ratio", "--bank", &fixture("trivial_bank.json"), "--gen", "disjoint-singleton:m=2,n=2", "--format", "csv"],
        vec!["reduce", "packing", &fixture("packing_positive.json"), &fixture("full_pair_4x3.json")],
        vec!["reduce", "hypergraph", &fixture("k5.json"), &fixture("full_pair_10x5.json")],
        vec!["reduce", "disjointness", &fixture("disjointness_negative.json"), &fixture("full_pair_4x2.json")],
        vec!["verify", "sauer-grid", "--samples", "5", "--seed", "3"],
        vec!["verify", "intersection-family", "--samples", "2", "--seed", "5"],
    ]
    .iter()
    .map(|v| v.iter().map(|s| s.to_string()).collect())
    .collect();
    let mut differing = Vec::new();
    for args in &runs {
        let go = || Command::new(env!("CARGO_BIN_EXE_kshatter")).args(args).output().unwrap();
        let (a, b) = (go(), go());
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        if a.stdout != b.stdout || a.status.code() != b.status.code() {
            differing.push(args[0].clone());
        }
    }
    report(
        12,
        differing.is_empty(),
        format!("{} commands run twice, differing: {differing:?}", runs.len()),
    );
}
