//! Allocation-bank constructions, explicit and implicit.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocations::{scan_argmax, Allocation, AllocationBank, AuctionGround, DupAllocation};
use crate::bundle::{Bundle, MAX_ITEMS};
use crate::error::{input, Budget, Error, Result};
use crate::matching::max_weight_matching;
use crate::rational::Rational;
use crate::valuations::ValueTable;
use crate::welfare::{best_partition, to_integers};

/// Per item, a partition of the bidders into `l` nonempty parts `Y_{x,1..l}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionTable {
    pub bidders: usize,
    pub parts: Vec<Vec<Vec<usize>>>,
}

impl PartitionTable {
    pub fn new(bidders: usize, parts: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if parts.is_empty() || parts.len() > MAX_ITEMS {
            return input(format!("partition table needs 1..={MAX_ITEMS} items"));
        }
        let l = parts[0].len();
        if l < 2 {
            return input("partition table needs l >= 2 parts per item");
        }
        for (x, row) in parts.iter().enumerate() {
            if row.len() != l {
                return input(format!("item {x} has {} parts, expected {l}", row.len()));
            }
            let mut seen = vec![false; bidders];
            for (i, part) in row.iter().enumerate() {
                if part.is_empty() {
                    return input(format!("item {x} part {i} is empty"));
                }
                for &y in part {
                    if y >= bidders || seen[y] {
                        return input(format!("item {x} part {i}: bidder {y} out of range or repeated"));
                    }
                    seen[y] = true;
                }
            }
            if seen.iter().any(|s| !s) {
                return input(format!("item {x}: parts do not cover all {bidders} bidders"));
            }
        }
        Ok(PartitionTable { bidders, parts })
    }

    pub fn items(&self) -> usize {
        self.parts.len()
    }

    pub fn l(&self) -> usize {
        self.parts[0].len()
    }

    /// Index of the part of item `x` containing bidder `y`.
    pub fn part_of(&self, x: usize, y: usize) -> usize {
        self.parts[x]
            .iter()
            .position(|p| p.contains(&y))
            .expect("validated table covers every bidder")
    }

    pub fn is_member(&self, a: &Allocation) -> bool {
        a.assignment.len() == self.items()
            && a.assignment.iter().all(Option::is_some)
            && (0..self.l()).any(|i| {
                a.assignment
                    .iter()
                    .enumerate()
                    .all(|(x, y)| self.part_of(x, y.expect("total")) != i)
            })
    }

    /// Items of `s` that meet every part from within `a`.
    pub fn bad_points(&self, s: Bundle, a: &[usize]) -> Vec<usize> {
        s.items()
            .filter(|&x| self.parts[x].iter().all(|p| p.iter().any(|y| a.contains(y))))
            .collect()
    }
}

/// Structured banks that are never listed in full.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImplicitFamily {
    /// Constant allocations plus every allocation giving each bidder at most one item.
    Sqrt { items: usize, bidders: usize },
    /// Total allocations `f` with some `i` such that `f(x) ∉ Y_{x,i}` for every `x`.
    Hy(PartitionTable),
    /// Every assignment of the items of `set` to bidders of `group`; other items stay unassigned.
    FullPair {
        items: usize,
        bidders: usize,
        set: Bundle,
        group: Vec<usize>,
    },
}

impl ImplicitFamily {
    pub fn ground(&self) -> AuctionGround {
        match self {
            ImplicitFamily::Sqrt { items, bidders } => AuctionGround {
                items: *items,
                bidders: *bidders,
                dup_limit: 1,
            },
            ImplicitFamily::Hy(t) => AuctionGround {
                items: t.items(),
                bidders: t.bidders,
                dup_limit: 1,
            },
            ImplicitFamily::FullPair { items, bidders, .. } => AuctionGround {
                items: *items,
                bidders: *bidders,
                dup_limit: 1,
            },
        }
    }

    pub fn contains(&self, a: &DupAllocation) -> bool {
        let g = self.ground();
        if a.bundles.len() != g.bidders {
            return false;
        }
        let Some(plain) = Allocation::from_dup(a, g.items) else {
            return false;
        };
        self.contains_plain(&plain)
    }

    fn contains_plain(&self, a: &Allocation) -> bool {
        match self {
            ImplicitFamily::Sqrt { bidders, .. } => {
                let mut counts = vec![0usize; *bidders];
                for y in a.assignment.iter().flatten() {
                    counts[*y] += 1;
                }
                counts.iter().all(|&c| c <= 1)
                    || a.assignment.iter().all(|y| y.is_some() && *y == a.assignment[0])
            }
            ImplicitFamily::Hy(t) => t.is_member(a),
            ImplicitFamily::FullPair { set, group, .. } => a
                .assignment
                .iter()
                .enumerate()
                .all(|(x, y)| match y {
                    Some(y) => set.contains(x) && group.contains(y),
                    None => !set.contains(x),
                }),
        }
    }

    /// Members in canonical order: assignment vectors in lexicographic order,
    /// with bidders `0..n` ranked before "unassigned".
    pub fn enumerate(&self, budget: &Budget) -> Result<Vec<DupAllocation>> {
        let g = self.ground();
        if let ImplicitFamily::FullPair { set, group, .. } = self {
            return full_pair_members(g.bidders, *set, group, budget);
        }
        budget.check_pow("implicit bank enumeration", g.bidders + 1, g.items)?;
        let symbols = g.bidders + 1;
        let mut out = Vec::new();
        let mut cur = vec![0usize; g.items];
        loop {
            let a = Allocation {
                assignment: cur.iter().map(|&s| (s < g.bidders).then_some(s)).collect(),
            };
            if self.contains_plain(&a) {
                out.push(a.to_dup(g.bidders));
            }
            let mut pos = g.items;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                cur[pos] += 1;
                if cur[pos] < symbols {
                    break;
                }
                cur[pos] = 0;
            }
        }
    }

    /// Canonically first member of maximum welfare.
    pub fn argmax_welfare(&self, tables: &[ValueTable]) -> Result<(DupAllocation, Rational)> {
        match self {
            ImplicitFamily::Sqrt { items, bidders } => Ok(sqrt_argmax(*items, *bidders, tables)),
            ImplicitFamily::Hy(_) => {
                let members = self.enumerate(&Budget::default())?;
                Ok(scan_argmax(members.iter(), tables).expect("H^Y always has members"))
            }
            ImplicitFamily::FullPair { bidders, set, group, .. } => full_pair_argmax(*bidders, *set, group, tables),
        }
    }
}

fn sqrt_argmax(m: usize, n: usize, tables: &[ValueTable]) -> (DupAllocation, Rational) {
    let base: Rational = tables.iter().map(|t| t.get(Bundle::EMPTY).clone()).sum();
    let gain = |i: usize, x: usize| tables[i].get(Bundle::singleton(x)) - tables[i].get(Bundle::EMPTY);
    let constant = |i: usize| &base + tables[i].get(Bundle::full(m)) - tables[i].get(Bundle::EMPTY);

    // Best welfare over matching-type members whose first items are fixed to `prefix`.
    let matching_with_prefix = |prefix: &[Option<usize>]| -> Option<Rational> {
        let mut used = vec![false; n];
        let mut value = base.clone();
        for (x, y) in prefix.iter().enumerate() {
            if let Some(y) = *y {
                if used[y] {
                    return None;
                }
                used[y] = true;
                value += gain(y, x);
            }
        }
        let free_rows: Vec<usize> = (0..n).filter(|&i| !used[i]).collect();
        let weights: Vec<Vec<Rational>> = free_rows
            .iter()
            .map(|&i| {
                (prefix.len()..m)
                    .map(|x| gain(i, x).max(Rational::zero()))
                    .collect()
            })
            .collect();
        Some(value + max_weight_matching(&weights).0)
    };
    let constant_with_prefix = |prefix: &[Option<usize>]| -> Option<Rational> {
        let first = match prefix.first() {
            None => return (0..n).map(constant).max(),
            Some(y) => (*y)?,
        };
        prefix.iter().all(|y| *y == Some(first)).then(|| constant(first))
    };
    let best_with_prefix = |prefix: &[Option<usize>]| -> Option<Rational> {
        match (matching_with_prefix(prefix), constant_with_prefix(prefix)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    };

    let target = best_with_prefix(&[]).expect("the empty prefix is always feasible");
    let mut prefix: Vec<Option<usize>> = Vec::with_capacity(m);
    for _ in 0..m {
        let choice = (0..n)
            .map(Some)
            .chain(std::iter::once(None))
            .find(|&c| {
                prefix.push(c);
                let ok = best_with_prefix(&prefix).is_some_and(|w| w == target);
                prefix.pop();
                ok
            })
            .expect("some extension keeps the optimum");
        prefix.push(choice);
    }
    let alloc = Allocation { assignment: prefix }.to_dup(n);
    (alloc, target)
}

/// The `n` allocations that hand every item to a single bidder.
pub fn trivial_bank(m: usize, n: usize) -> Result<AllocationBank> {
    let ground = AuctionGround::new(m, n, 1)?;
    let allocations = (0..n)
        .map(|i| {
            let mut a = DupAllocation::empty(n);
            a.bundles[i] = Bundle::full(m);
            a
        })
        .collect();
    AllocationBank::explicit(ground, allocations)
}

pub fn sqrt_bank(m: usize, n: usize) -> Result<AllocationBank> {
    AuctionGround::new(m, n, 1)?;
    Ok(AllocationBank::Implicit(ImplicitFamily::Sqrt { items: m, bidders: n }))
}

pub fn hy_bank(table: PartitionTable) -> Result<AllocationBank> {
    let table = PartitionTable::new(table.bidders, table.parts)?;
    Ok(AllocationBank::Implicit(ImplicitFamily::Hy(table)))
}

/// Per item, a seeded uniform split of the bidders into `l` parts of size `n / l`.
pub fn random_hy(m: usize, n: usize, l: usize, seed: u64) -> Result<PartitionTable> {
    if l < 2 || n % l != 0 {
        return input(format!("l = {l} must be at least 2 and divide n = {n}"));
    }
    if m == 0 || m > MAX_ITEMS {
        return input(format!("item count must be in 1..={MAX_ITEMS}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = n / l;
    let parts = (0..m)
        .map(|_| {
            let mut bidders: Vec<usize> = (0..n).collect();
            bidders.shuffle(&mut rng);
            bidders
                .chunks(size)
                .map(|c| {
                    let mut c = c.to_vec();
                    c.sort_unstable();
                    c
                })
                .collect()
        })
        .collect();
    PartitionTable::new(n, parts)
}

/// Every assignment of the items of `s` to bidders of `a`, other items unassigned.
pub fn full_pair_bank(m: usize, n: usize, s: Bundle, a: &[usize]) -> Result<AllocationBank> {
    AuctionGround::new(m, n, 1)?;
    if s.span() > m || a.iter().any(|&y| y >= n) {
        return input("full-pair bank: S or A leaves the ground");
    }
    if a.is_empty() && !s.is_empty() {
        return input("full-pair bank: A is empty but S is not");
    }
    let mut group = a.to_vec();
    group.sort_unstable();
    group.dedup();
    if group.len() != a.len() {
        return input("full-pair bank: A repeats a bidder");
    }
    Ok(AllocationBank::Implicit(ImplicitFamily::FullPair {
        items: m,
        bidders: n,
        set: s,
        group,
    }))
}

fn full_pair_members(n: usize, set: Bundle, group: &[usize], budget: &Budget) -> Result<Vec<DupAllocation>> {
    let items = set.to_vec();
    budget.check_pow("full-pair bank enumeration", group.len(), items.len())?;
    let mut out = Vec::new();
    let mut cur = vec![0usize; items.len()];
    loop {
        let mut alloc = DupAllocation::empty(n);
        for (pos, &x) in items.iter().enumerate() {
            let y = group[cur[pos]];
            alloc.bundles[y] = alloc.bundles[y].with(x);
        }
        out.push(alloc);
        let mut pos = items.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < group.len() {
                break;
            }
            cur[pos] = 0;
        }
    }
}

/// Lexicographically first optimal assignment, fixing items one at a time.
fn full_pair_argmax(n: usize, set: Bundle, group: &[usize], tables: &[ValueTable]) -> Result<(DupAllocation, Rational)> {
    let items = set.to_vec();
    let width = items.len();
    let steps = num_traits::pow(BigUint::from(3u8), width) * BigUint::from(group.len().max(1));
    Budget::default().check("full-pair welfare optimization", &steps)?;
    let outside: Rational = (0..n)
        .filter(|y| !group.contains(y))
        .map(|y| tables[y].get(Bundle::EMPTY).clone())
        .sum();
    if group.is_empty() {
        return Ok((DupAllocation::empty(n), outside));
    }
    let global = |local: usize| Bundle::from_items(items.iter().enumerate().filter(|(p, _)| local >> p & 1 == 1).map(|(_, &x)| x));
    let rows: Vec<Vec<Rational>> = group
        .iter()
        .map(|&y| (0..1usize << width).map(|l| tables[y].get(global(l)).clone()).collect())
        .collect();
    let mut fixed = vec![0usize; group.len()];
    let inner = match to_integers(rows.iter().map(Vec::as_slice)) {
        Some((ints, denom)) => {
            let target = best_partition(&ints, width, &fixed);
            fix_lexicographically(width, &mut fixed, |f| best_partition(&ints, width, f) == target);
            Rational::new(BigInt::from(target), denom)
        }
        None => {
            let target = best_partition(&rows, width, &fixed);
            fix_lexicographically(width, &mut fixed, |f| best_partition(&rows, width, f) == target);
            target
        }
    };
    let mut alloc = DupAllocation::empty(n);
    for (j, &y) in group.iter().enumerate() {
        alloc.bundles[y] = global(fixed[j]);
    }
    Ok((alloc, outside + inner))
}

fn fix_lexicographically(width: usize, fixed: &mut [usize], keeps_optimum: impl Fn(&[usize]) -> bool) {
    for pos in 0..width {
        let j = (0..fixed.len())
            .find(|&j| {
                fixed[j] |= 1 << pos;
                let ok = keeps_optimum(fixed);
                fixed[j] &= !(1 << pos);
                ok
            })
            .expect("some bidder keeps the optimum");
        fixed[j] |= 1 << pos;
    }
}

/// `t` partitions of a universe into `k` labelled, possibly empty parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionFamily {
    pub universe: usize,
    pub parts: usize,
    /// `partitions[s][i]` is the part `A_i^s`.
    pub partitions: Vec<Vec<Bundle>>,
}

impl PartitionFamily {
    pub fn new(universe: usize, parts: usize, partitions: Vec<Vec<Bundle>>) -> Result<Self> {
        if universe > MAX_ITEMS {
            return input(format!("universe larger than {MAX_ITEMS}"));
        }
        if parts < 2 {
            return input("a partition family needs k >= 2 parts");
        }
        let full = Bundle::full(universe);
        for (s, p) in partitions.iter().enumerate() {
            if p.len() != parts {
                return input(format!("partition {s} has {} parts, expected {parts}", p.len()));
            }
            let mut union = Bundle::EMPTY;
            for part in p {
                if !part.is_disjoint(union) {
                    return input(format!("partition {s} has overlapping parts"));
                }
                union = union.union(*part);
            }
            if union != full {
                return input(format!("partition {s} does not cover the universe"));
            }
        }
        Ok(PartitionFamily {
            universe,
            parts,
            partitions,
        })
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }
}

/// `∩_i A_i^{s_i}` is empty exactly when all `s_i` agree, over all `t^k` tuples.
pub fn verify_k_wise(family: &PartitionFamily) -> bool {
    let (k, t) = (family.parts, family.len());
    if t == 0 {
        return true;
    }
    let mut idx = vec![0usize; k];
    loop {
        let all_equal = idx.iter().all(|&s| s == idx[0]);
        let meet = idx
            .iter()
            .enumerate()
            .fold(Bundle::full(family.universe), |acc, (i, &s)| {
                acc.intersection(family.partitions[s][i])
            });
        if meet.is_empty() != all_equal {
            return false;
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return true;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < t {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// A sampled family together with the seed and the attempt that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledFamily {
    pub family: PartitionFamily,
    pub seed: u64,
    pub attempts: usize,
}

/// Samples `t` uniform `k`-part partitions until the family passes [`verify_k_wise`].
pub fn intersection_family(size_x: usize, k: usize, t: usize, seed: u64, max_retries: usize) -> Result<SampledFamily> {
    if t == 0 {
        return input("t must be at least 1");
    }
    if k < 2 || size_x > MAX_ITEMS {
        return input(format!("need k >= 2 and |X| <= {MAX_ITEMS}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=max_retries {
        let partitions = (0..t)
            .map(|_| {
                let mut parts = vec![Bundle::EMPTY; k];
                for x in 0..size_x {
                    let i = rng.gen_range(0..k);
                    parts[i] = parts[i].with(x);
                }
                parts
            })
            .collect();
        let family = PartitionFamily::new(size_x, k, partitions)?;
        if verify_k_wise(&family) {
            return Ok(SampledFamily {
                family,
                seed,
                attempts: attempt,
            });
        }
    }
    Err(Error::Construction {
        what: format!("{k}-wise intersection family of size {t} over {size_x} elements"),
        attempts: max_retries,
    })
}

/// On-disk bank description: an explicit list or a named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BankFile {
    Explicit {
        m: usize,
        n: usize,
        d: usize,
        allocations: Vec<Vec<Bundle>>,
    },
    Family {
        family: String,
        params: serde_json::Value,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroundParams {
    m: usize,
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FullPairParams {
    m: usize,
    n: usize,
    items: Bundle,
    bidders: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HyParams {
    n: usize,
    #[serde(default)]
    table: Option<Vec<Vec<Vec<usize>>>>,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    l: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

fn params<T: serde::de::DeserializeOwned>(family: &str, v: &serde_json::Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Input(format!("params of family \"{family}\": {e}")))
}

impl BankFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Input(format!("bank file, line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn into_bank(self) -> Result<AllocationBank> {
        match self {
            BankFile::Explicit { m, n, d, allocations } => {
                let ground = AuctionGround::new(m, n, d)?;
                AllocationBank::explicit(ground, allocations.into_iter().map(DupAllocation::new).collect())
            }
            BankFile::Family { family, params: p } => match family.as_str() {
                "trivial" => {
                    let g: GroundParams = params(&family, &p)?;
                    trivial_bank(g.m, g.n)
                }
                "sqrt" => {
                    let g: GroundParams = params(&family, &p)?;
                    sqrt_bank(g.m, g.n)
                }
                "full_pair" => {
                    let f: FullPairParams = params(&family, &p)?;
                    full_pair_bank(f.m, f.n, f.items, &f.bidders)
                }
                "hy" => {
                    let h: HyParams = params(&family, &p)?;
                    let table = match (h.table, h.m, h.l, h.seed) {
                        (Some(t), None, None, None) => PartitionTable::new(h.n, t)?,
                        (None, Some(m), Some(l), Some(seed)) => random_hy(m, h.n, l, seed)?,
                        _ => return input("family \"hy\" needs either \"table\" or all of \"m\", \"l\", \"seed\""),
                    };
                    hy_bank(table)
                }
                other => input(format!("unknown bank family \"{other}\"")),
            },
        }
    }
}

/// Number of members of the sqrt family: `n` constants plus partial injections.
pub fn sqrt_family_size(m: usize, n: usize) -> BigUint {
    // Injections of j chosen items into n bidders, summed over j.
    let mut total = BigUint::zero();
    for j in 0..=m.min(n) {
        let choose = num_integer::binomial(BigUint::from(m), BigUint::from(j));
        let falling: BigUint = (0..j).map(|i| BigUint::from(n - i)).product();
        total += choose * falling;
    }
    // Constants with m >= 2 are not injections; with m = 1 they already are.
    if m >= 2 {
        total += BigUint::from(n);
    }
    total
}
