//! Allocations, duplicate allocations, banks and their shattering properties.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{pow, Zero};
use serde::{Deserialize, Serialize};

use crate::banks::ImplicitFamily;
use crate::bundle::{combinations, Bundle, MAX_ITEMS};
use crate::error::{input, Budget, Result};
use crate::rational::Rational;
use crate::shattering::{FunctionClass, GroundPair, Label};
use crate::valuations::ValueTable;

/// Items, bidders and the number of copies of each item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AuctionGround {
    pub items: usize,
    pub bidders: usize,
    pub dup_limit: usize,
}

impl AuctionGround {
    pub fn new(items: usize, bidders: usize, dup_limit: usize) -> Result<Self> {
        if items == 0 || items > MAX_ITEMS {
            return input(format!("item count must be in 1..={MAX_ITEMS}, got {items}"));
        }
        if bidders == 0 {
            return input("need at least one bidder");
        }
        if dup_limit == 0 {
            return input("duplicate limit d must be at least 1");
        }
        Ok(AuctionGround {
            items,
            bidders,
            dup_limit,
        })
    }
}

/// A plain allocation as a map from items to bidders (`None` = unassigned).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    pub assignment: Vec<Option<usize>>,
}

impl Allocation {
    pub fn to_dup(&self, bidders: usize) -> DupAllocation {
        let mut bundles = vec![Bundle::EMPTY; bidders];
        for (x, owner) in self.assignment.iter().enumerate() {
            if let Some(i) = owner {
                bundles[*i] = bundles[*i].with(x);
            }
        }
        DupAllocation { bundles }
    }

    /// Inverse of [`Allocation::to_dup`]; fails if some item has two owners.
    pub fn from_dup(a: &DupAllocation, items: usize) -> Option<Self> {
        let mut assignment = vec![None; items];
        for (i, b) in a.bundles.iter().enumerate() {
            for x in b.items() {
                if x >= items || assignment[x].is_some() {
                    return None;
                }
                assignment[x] = Some(i);
            }
        }
        Some(Allocation { assignment })
    }
}

/// One bundle per bidder; an item may sit in several bundles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DupAllocation {
    pub bundles: Vec<Bundle>,
}

impl DupAllocation {
    pub fn new(bundles: Vec<Bundle>) -> Self {
        DupAllocation { bundles }
    }

    pub fn empty(bidders: usize) -> Self {
        DupAllocation {
            bundles: vec![Bundle::EMPTY; bidders],
        }
    }

    pub fn bundle(&self, i: usize) -> Bundle {
        self.bundles[i]
    }

    /// Largest number of bundles any single item belongs to.
    pub fn max_multiplicity(&self) -> usize {
        let mut counts = [0usize; MAX_ITEMS];
        for b in &self.bundles {
            for x in b.items() {
                counts[x] += 1;
            }
        }
        counts.into_iter().max().unwrap_or(0)
    }

    pub fn fits(&self, ground: &AuctionGround) -> bool {
        self.bundles.len() == ground.bidders
            && self.bundles.iter().all(|b| b.span() <= ground.items)
            && self.max_multiplicity() <= ground.dup_limit
    }

    pub fn welfare(&self, tables: &[ValueTable]) -> Rational {
        self.bundles
            .iter()
            .zip(tables)
            .map(|(b, t)| t.get(*b))
            .sum()
    }

    fn validate(&self, ground: &AuctionGround, idx: usize) -> Result<()> {
        if self.bundles.len() != ground.bidders {
            return input(format!(
                "allocation {idx} has {} bundles, expected {}",
                self.bundles.len(),
                ground.bidders
            ));
        }
        if let Some(b) = self.bundles.iter().find(|b| b.span() > ground.items) {
            return input(format!("allocation {idx} bundle {b:?} uses an item outside [0, {})", ground.items));
        }
        if self.max_multiplicity() > ground.dup_limit {
            return input(format!(
                "allocation {idx} gives an item to more than d = {} bidders",
                ground.dup_limit
            ));
        }
        Ok(())
    }
}

/// The range of a maximal-in-range mechanism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllocationBank {
    /// A deduplicated list; list order is the canonical tie-break order.
    Explicit {
        ground: AuctionGround,
        allocations: Vec<DupAllocation>,
    },
    /// A structured family with its own membership test and maximizer.
    Implicit(ImplicitFamily),
}

impl AllocationBank {
    /// Builds an explicit bank, rejecting invalid or repeated allocations by index.
    pub fn explicit(ground: AuctionGround, allocations: Vec<DupAllocation>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(allocations.len());
        for (i, a) in allocations.iter().enumerate() {
            a.validate(&ground, i)?;
            if !seen.insert(a) {
                return input(format!("allocation {i} duplicates an earlier allocation"));
            }
        }
        Ok(AllocationBank::Explicit {
            ground,
            allocations,
        })
    }

    /// Builds an explicit bank, silently dropping repeats (first occurrence wins).
    pub fn explicit_dedup(ground: AuctionGround, allocations: Vec<DupAllocation>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(allocations.len());
        let mut kept = Vec::with_capacity(allocations.len());
        for (i, a) in allocations.into_iter().enumerate() {
            a.validate(&ground, i)?;
            if seen.insert(a.clone()) {
                kept.push(a);
            }
        }
        Ok(AllocationBank::Explicit {
            ground,
            allocations: kept,
        })
    }

    pub fn ground(&self) -> AuctionGround {
        match self {
            AllocationBank::Explicit { ground, .. } => *ground,
            AllocationBank::Implicit(f) => f.ground(),
        }
    }

    pub fn contains(&self, a: &DupAllocation) -> bool {
        match self {
            AllocationBank::Explicit { allocations, .. } => allocations.contains(a),
            AllocationBank::Implicit(f) => f.contains(a),
        }
    }

    /// Every member, in canonical order.
    pub fn members(&self, budget: &Budget) -> Result<Vec<DupAllocation>> {
        match self {
            AllocationBank::Explicit { allocations, .. } => Ok(allocations.clone()),
            AllocationBank::Implicit(f) => f.enumerate(budget),
        }
    }

    /// First member of maximum welfare in canonical order, with that welfare.
    pub fn argmax_welfare(&self, tables: &[ValueTable]) -> Result<(DupAllocation, Rational)> {
        let g = self.ground();
        if tables.len() != g.bidders || tables.iter().any(|t| t.items() != g.items) {
            return input(format!(
                "valuations do not match the bank ground ({} items, {} bidders)",
                g.items, g.bidders
            ));
        }
        match self {
            AllocationBank::Explicit { allocations, .. } => scan_argmax(allocations.iter(), tables)
                .ok_or_else(|| crate::Error::Input("the bank is empty".into())),
            AllocationBank::Implicit(f) => f.argmax_welfare(tables),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            AllocationBank::Explicit { allocations, .. } => allocations.is_empty(),
            AllocationBank::Implicit(_) => false,
        }
    }
}

/// First maximizer of welfare over an ordered sequence.
pub(crate) fn scan_argmax<'a, I>(members: I, tables: &[ValueTable]) -> Option<(DupAllocation, Rational)>
where
    I: IntoIterator<Item = &'a DupAllocation>,
{
    let mut best: Option<(&DupAllocation, Rational)> = None;
    for a in members {
        let w = a.welfare(tables);
        if best.as_ref().is_none_or(|(_, bw)| w > *bw) {
            best = Some((a, w));
        }
    }
    best.map(|(a, w)| (a.clone(), w))
}

/// An item set `S` and bidder set `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWitness {
    pub items: Bundle,
    pub bidders: Vec<usize>,
}

fn check_pair(ground: &AuctionGround, s: Bundle, a: &[usize]) -> Result<()> {
    if s.span() > ground.items {
        return input(format!("item set {s:?} leaves [0, {})", ground.items));
    }
    let mut seen = HashSet::new();
    for &y in a {
        if y >= ground.bidders {
            return input(format!("bidder {y} outside [0, {})", ground.bidders));
        }
        if !seen.insert(y) {
            return input(format!("bidder {y} repeated"));
        }
    }
    Ok(())
}

/// The labeling of `S` by `A` that `alloc` induces, if `{S_y ∩ S}_{y ∈ A}` partitions `S`.
fn induced_labeling(alloc: &DupAllocation, s_items: &[usize], a: &[usize]) -> Option<Vec<Label>> {
    let mut f = Vec::with_capacity(s_items.len());
    for &x in s_items {
        let mut owner = None;
        for (pos, &y) in a.iter().enumerate() {
            if alloc.bundles[y].contains(x) {
                if owner.is_some() {
                    return None;
                }
                owner = Some(pos as Label);
            }
        }
        f.push(owner?);
    }
    Some(f)
}

/// `H|_{S,A}`: the functions `f : S -> A` with `f^{-1}(y) = S_y ∩ S` for some bank member.
///
/// Points are the items of `S` in increasing order; label `j` stands for `A[j]`.
pub fn restrict_pair(bank: &AllocationBank, s: Bundle, a: &[usize], budget: &Budget) -> Result<FunctionClass> {
    let ground = bank.ground();
    check_pair(&ground, s, a)?;
    let members = bank.members(budget)?;
    Ok(restrict_members(&members, s, a))
}

fn restrict_members(members: &[DupAllocation], s: Bundle, a: &[usize]) -> FunctionClass {
    let items = s.to_vec();
    let ground = GroundPair {
        points: items.len(),
        labels: a.len(),
    };
    FunctionClass::from_rows_dedup(ground, members.iter().filter_map(|m| induced_labeling(m, &items, a)))
}

/// True iff every partition of `S` among `A` is induced by the bank.
///
/// A single bidder `A = {a}` is read as the pair `(S, a)`, i.e. index shattering.
pub fn is_pair_shattered(bank: &AllocationBank, s: Bundle, a: &[usize], budget: &Budget) -> Result<bool> {
    let ground = bank.ground();
    check_pair(&ground, s, a)?;
    if s.is_empty() || a.is_empty() {
        return input("a pair needs nonempty S and A");
    }
    let members = bank.members(budget)?;
    Ok(pair_shattered_in(&members, ground.bidders, s, a))
}

/// True iff all `|A|^|S|` partitions of `S` among `A` are induced, for any `|A| >= 1`.
pub fn is_partition_shattered(bank: &AllocationBank, s: Bundle, a: &[usize], budget: &Budget) -> Result<bool> {
    let ground = bank.ground();
    check_pair(&ground, s, a)?;
    if s.is_empty() || a.is_empty() {
        return input("a pair needs nonempty S and A");
    }
    if let AllocationBank::Implicit(ImplicitFamily::FullPair { set, group, .. }) = bank {
        return Ok(s.is_subset_of(*set) && a.iter().all(|y| group.contains(y)));
    }
    let members = bank.members(budget)?;
    let need = pow(BigUint::from(a.len()), s.len());
    Ok(BigUint::from(restrict_members(&members, s, a).len()) == need)
}

fn pair_shattered_in(members: &[DupAllocation], bidders: usize, s: Bundle, a: &[usize]) -> bool {
    if let [single] = a {
        return index_shattered_in(members, bidders, s, *single);
    }
    let need = pow(BigUint::from(a.len()), s.len());
    BigUint::from(restrict_members(members, s, a).len()) == need
}

fn index_shattered_in(members: &[DupAllocation], bidders: usize, s: Bundle, bidder: usize) -> bool {
    let everyone: Vec<usize> = (0..bidders).collect();
    let items = s.to_vec();
    let traces: HashSet<Bundle> = members
        .iter()
        .filter(|m| induced_labeling(m, &items, &everyone).is_some())
        .map(|m| m.bundles[bidder].intersection(s))
        .collect();
    traces.len() == 1usize << s.len()
}

/// True iff every `T ⊆ S` is bidder `a`'s trace on `S` in some member that
/// hands each item of `S` to exactly one bidder.
pub fn is_index_shattered(bank: &AllocationBank, s: Bundle, bidder: usize, budget: &Budget) -> Result<bool> {
    let ground = bank.ground();
    check_pair(&ground, s, &[bidder])?;
    let members = bank.members(budget)?;
    Ok(index_shattered_in(&members, ground.bidders, s, bidder))
}

/// Lexicographically first shattered pair with `|S| = size_s`, `|A| = size_a`.
///
/// Item sets are the outer loop, bidder sets the inner one; both run in
/// lexicographic order of their sorted elements.
pub fn find_shattered_pair(
    bank: &AllocationBank,
    size_s: usize,
    size_a: usize,
    budget: &Budget,
) -> Result<Option<PairWitness>> {
    let ground = bank.ground();
    if size_s == 0 || size_a == 0 || size_s > ground.items || size_a > ground.bidders {
        return input(format!(
            "pair sizes ({size_s}, {size_a}) must be positive and fit the ground ({}, {})",
            ground.items, ground.bidders
        ));
    }
    let members = bank.members(budget)?;
    for s in combinations(ground.items, size_s) {
        for a in itertools::Itertools::combinations(0..ground.bidders, size_a) {
            if pair_shattered_in(&members, ground.bidders, s, &a) {
                return Ok(Some(PairWitness { items: s, bidders: a }));
            }
        }
    }
    Ok(None)
}

/// Which allocations `{T_y}` the containment and intersection checks quantify over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionScope {
    /// Also range over allocations that leave items unassigned.
    pub include_partial: bool,
    pub budget: Budget,
}

impl Default for PartitionScope {
    fn default() -> Self {
        PartitionScope {
            include_partial: false,
            budget: Budget::default(),
        }
    }
}

/// Every allocation `{T_y}` in scope, as item -> bidder maps.
pub(crate) fn target_allocations(ground: &AuctionGround, scope: &PartitionScope) -> Result<Vec<Allocation>> {
    let symbols = ground.bidders + scope.include_partial as usize;
    scope
        .budget
        .check_pow("partition enumeration", symbols, ground.items)?;
    let mut out = Vec::new();
    let mut cur = vec![0usize; ground.items];
    loop {
        out.push(Allocation {
            assignment: cur
                .iter()
                .map(|&s| if s < ground.bidders { Some(s) } else { None })
                .collect(),
        });
        let mut pos = ground.items;
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

fn indicator_tables(target: &DupAllocation, m: usize, f: impl Fn(Bundle, Bundle) -> Rational) -> Vec<ValueTable> {
    target
        .bundles
        .iter()
        .map(|&t| ValueTable::from_fn(m, |s| f(t, s)))
        .collect()
}

/// Least `α` with the α-containment property, or `None` if none is finite.
///
/// For a target `{T_y}`, the bank's best cover count is the welfare of the
/// single-minded profile `v_y(S) = 1[∅ ≠ T_y ⊆ S]`.
pub fn min_containment_alpha(bank: &AllocationBank, scope: &PartitionScope) -> Result<Option<Rational>> {
    let ground = bank.ground();
    if bank.is_empty() {
        return Ok(None);
    }
    let m = ground.items;
    let mut worst = Rational::zero();
    for t in target_allocations(&ground, scope)? {
        let target = t.to_dup(ground.bidders);
        let nonempty = target.bundles.iter().filter(|b| !b.is_empty()).count();
        if nonempty == 0 {
            continue;
        }
        let tables = indicator_tables(&target, m, |t, s| {
            Rational::from_integer(BigInt::from((!t.is_empty() && t.is_subset_of(s)) as u8))
        });
        let (_, covered) = bank.argmax_welfare(&tables)?;
        if covered.is_zero() {
            return Ok(None);
        }
        let ratio = Rational::from_integer(BigInt::from(nonempty)) / covered;
        if ratio > worst {
            worst = ratio;
        }
    }
    Ok(Some(worst))
}

pub fn has_containment(bank: &AllocationBank, alpha: &Rational, scope: &PartitionScope) -> Result<bool> {
    Ok(min_containment_alpha(bank, scope)?.is_some_and(|a| a <= *alpha))
}

/// Least `α` with the α-intersection property, or `None` if none is finite.
///
/// The bank's best agreement with `{T_y}` is the welfare of the 0/1-additive
/// profile `v_y(S) = |S ∩ T_y|`.
pub fn min_intersection_alpha(bank: &AllocationBank, scope: &PartitionScope) -> Result<Option<Rational>> {
    let ground = bank.ground();
    if bank.is_empty() {
        return Ok(None);
    }
    let m = ground.items;
    let mut worst = Rational::zero();
    for t in target_allocations(&ground, scope)? {
        let target = t.to_dup(ground.bidders);
        let total: usize = target.bundles.iter().map(|b| b.len()).sum();
        if total == 0 {
            continue;
        }
        let tables = indicator_tables(&target, m, |t, s| {
            Rational::from_integer(BigInt::from(t.intersection(s).len()))
        });
        let (_, agree) = bank.argmax_welfare(&tables)?;
        if agree.is_zero() {
            return Ok(None);
        }
        let ratio = Rational::from_integer(BigInt::from(total)) / agree;
        if ratio > worst {
            worst = ratio;
        }
    }
    Ok(Some(worst))
}

pub fn has_intersection(bank: &AllocationBank, alpha: &Rational, scope: &PartitionScope) -> Result<bool> {
    Ok(min_intersection_alpha(bank, scope)?.is_some_and(|a| a <= *alpha))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionReport {
    pub items: Bundle,
    pub count: usize,
    /// `count >= (1+k)^(m/n)`, compared exactly as `count^n >= (1+k)^m`.
    pub meets_guarantee: bool,
}

/// Among item sets of size `⌈m/n⌉`, the first maximizing `|H|_{S,Y}|`.
pub fn large_restriction_subset(bank: &AllocationBank, k: usize, budget: &Budget) -> Result<RestrictionReport> {
    let ground = bank.ground();
    let (m, n) = (ground.items, ground.bidders);
    let size = m.div_ceil(n);
    let subsets = num_integer::binomial(BigUint::from(m), BigUint::from(size));
    budget.check("restriction subset search", &subsets)?;
    let members = bank.members(budget)?;
    let everyone: Vec<usize> = (0..n).collect();
    let mut best: Option<(Bundle, usize)> = None;
    for s in combinations(m, size) {
        let count = restrict_members(&members, s, &everyone).len();
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((s, count));
        }
    }
    let (items, count) = best.expect("at least one subset of size ⌈m/n⌉");
    let meets_guarantee = pow(BigUint::from(count), n) >= pow(BigUint::from(1 + k), m);
    Ok(RestrictionReport {
        items,
        count,
        meets_guarantee,
    })
}
