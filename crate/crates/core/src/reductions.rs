//! Packing, hypergraph and disjointness reductions run against a MIR mechanism.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::allocations::{is_partition_shattered, AllocationBank, PairWitness};
use crate::banks::{verify_k_wise, PartitionFamily};
use crate::bundle::{combinations, Bundle, MAX_ITEMS};
use crate::error::{input, Budget, Error, Result};
use crate::mechanisms::{AuctionInstance, ser_rational};
use crate::rational::{int, Rational};
use crate::valuations::Valuation;

/// Sets over a universe `0..universe`, a target count `C` and multiplicity `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackingInstance {
    pub universe: usize,
    pub sets: Vec<Bundle>,
    pub threshold: usize,
    pub multiplicity: usize,
}

impl PackingInstance {
    pub fn new(universe: usize, sets: Vec<Bundle>, threshold: usize, multiplicity: usize) -> Result<Self> {
        if universe > MAX_ITEMS {
            return input(format!("universe larger than {MAX_ITEMS}"));
        }
        if threshold < 1 {
            return input("threshold C must be at least 1");
        }
        if multiplicity < 2 {
            return input("multiplicity k must be at least 2");
        }
        if let Some(i) = sets.iter().position(|s| s.span() > universe) {
            return input(format!("set {i} leaves the universe"));
        }
        Ok(PackingInstance {
            universe,
            sets,
            threshold,
            multiplicity,
        })
    }
}

/// Largest number of sets that together cover no element more than `cap` times.
pub fn max_bounded_packing(sets: &[Bundle], universe: usize, cap: usize) -> usize {
    fn go(sets: &[Bundle], idx: usize, cover: &mut Vec<usize>, cap: usize, chosen: usize, best: &mut usize) {
        if chosen + (sets.len() - idx) <= *best {
            return;
        }
        if idx == sets.len() {
            *best = chosen;
            return;
        }
        let s = sets[idx];
        if s.items().all(|x| cover[x] < cap) {
            for x in s.items() {
                cover[x] += 1;
            }
            go(sets, idx + 1, cover, cap, chosen + 1, best);
            for x in s.items() {
                cover[x] -= 1;
            }
        }
        go(sets, idx + 1, cover, cap, chosen, best);
    }
    let mut best = 0;
    go(sets, 0, &mut vec![0; universe.max(1)], cap, 0, &mut best);
    best
}

/// Which side of a promise problem an input falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Promise {
    Positive,
    Negative,
    /// Neither case holds; the decision carries no guarantee.
    Outside,
}

/// Direct classification by exact backtracking.
pub fn packing_promise(p: &PackingInstance) -> Promise {
    if max_bounded_packing(&p.sets, p.universe, 1) >= p.threshold {
        Promise::Positive
    } else if max_bounded_packing(&p.sets, p.universe, p.multiplicity - 1) < p.threshold {
        Promise::Negative
    } else {
        Promise::Outside
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    #[serde(serialize_with = "ser_rational")]
    pub welfare: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub threshold: Rational,
    pub decision: bool,
    pub promise: Promise,
}

fn require_shattered(bank: &AllocationBank, pair: &PairWitness) -> Result<()> {
    if pair.items.is_empty() || pair.bidders.is_empty() {
        return input("the pair needs nonempty S and A");
    }
    if !is_partition_shattered(bank, pair.items, &pair.bidders, &Budget::default())? {
        return Err(Error::Contract(format!(
            "the bank does not shatter S = {:?}, A = {:?}",
            pair.items, pair.bidders
        )));
    }
    Ok(())
}

/// Maps local element `e` to the `e`-th item of `items`.
fn embed(local: Bundle, items: &[usize]) -> Bundle {
    Bundle::from_items(local.items().map(|e| items[e]))
}

/// Single-minded bidders on the packing sets, with `d = k - 1` copies per item.
pub fn packing_to_auction(
    p: &PackingInstance,
    bank: &AllocationBank,
    pair: &PairWitness,
) -> Result<(AuctionInstance, ReductionReport)> {
    let ground = bank.ground();
    let items = pair.items.to_vec();
    if p.universe > items.len() {
        return input(format!("universe of {} elements does not fit into |S| = {}", p.universe, items.len()));
    }
    if p.sets.len() > pair.bidders.len() {
        return input(format!("{} sets but only {} bidders in the pair", p.sets.len(), pair.bidders.len()));
    }
    require_shattered(bank, pair)?;
    let m = ground.items;
    let mut vals = vec![Valuation::zero(m)?; ground.bidders];
    for (set, &bidder) in p.sets.iter().zip(&pair.bidders) {
        vals[bidder] = Valuation::single_minded(m, embed(*set, &items))?;
    }
    let inst = AuctionInstance::new(m, p.multiplicity - 1, vals)?;
    let (_, welfare) = bank.argmax_welfare(&inst.tables()?)?;
    let threshold = int(p.threshold as i64);
    let report = ReductionReport {
        decision: welfare >= threshold,
        welfare,
        threshold,
        promise: packing_promise(p),
    };
    Ok((inst, report))
}

/// A `k`-uniform hypergraph on vertices `0..vertices`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypergraph {
    pub vertices: usize,
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Validates the graph and returns its uniform edge size.
    pub fn uniformity(&self) -> Result<usize> {
        let Some(first) = self.edges.first() else {
            return input("a hypergraph without edges has no uniform edge size");
        };
        let k = first.len();
        for (i, e) in self.edges.iter().enumerate() {
            let distinct: BTreeSet<_> = e.iter().collect();
            if e.len() != k || distinct.len() != k {
                return input(format!("edge {i} is not a set of {k} distinct vertices"));
            }
            if let Some(v) = e.iter().find(|&&v| v >= self.vertices) {
                return input(format!("edge {i} uses vertex {v} outside [0, {})", self.vertices));
            }
        }
        if k < 2 {
            return input("edges need at least 2 vertices");
        }
        Ok(k)
    }

    fn vertex_mask(&self, e: &[usize]) -> Bundle {
        Bundle::from_items(e.iter().copied())
    }
}

/// Edges become elements, each vertex the set of its edges, `C = ⌈|V| / 2k⌉`.
pub fn hypergraph_to_packing(g: &Hypergraph) -> Result<PackingInstance> {
    let k = g.uniformity()?;
    let sets = (0..g.vertices)
        .map(|v| Bundle::from_items(g.edges.iter().enumerate().filter(|(_, e)| e.contains(&v)).map(|(i, _)| i)))
        .collect();
    PackingInstance::new(g.edges.len(), sets, g.vertices.div_ceil(2 * k), k)
}

/// Direct classification: a large set meeting every edge at most once, or every
/// set of size `≥ |V| / 2k` containing a whole edge.
pub fn hypergraph_promise(g: &Hypergraph) -> Result<Promise> {
    let k = g.uniformity()?;
    if g.vertices > 20 {
        return input("hypergraph promise check is limited to 20 vertices");
    }
    let size = g.vertices.div_ceil(2 * k);
    let edges: Vec<Bundle> = g.edges.iter().map(|e| g.vertex_mask(e)).collect();
    let independent_at = |s: usize| combinations(g.vertices, s).any(|v| edges.iter().all(|e| e.intersection(v).len() <= 1));
    if (size..=g.vertices).any(independent_at) {
        return Ok(Promise::Positive);
    }
    let contains_edge = |v: Bundle| edges.iter().any(|e| e.is_subset_of(v));
    // Supersets of an edge-containing set contain it too, so size `size` suffices.
    if combinations(g.vertices, size).all(contains_edge) {
        Ok(Promise::Negative)
    } else {
        Ok(Promise::Outside)
    }
}

/// `r` players, each holding a subset of `0..t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisjointnessInstance {
    pub t: usize,
    pub sets: Vec<BTreeSet<usize>>,
}

impl DisjointnessInstance {
    pub fn new(t: usize, sets: Vec<BTreeSet<usize>>) -> Result<Self> {
        if t < 1 {
            return input("t must be at least 1");
        }
        if sets.len() < 2 {
            return input("need at least 2 players");
        }
        if let Some(i) = sets.iter().position(|s| s.iter().any(|&x| x >= t)) {
            return input(format!("player {i} holds an index outside [0, {t})"));
        }
        Ok(DisjointnessInstance { t, sets })
    }

    /// Common element: positive; pairwise disjoint: negative.
    pub fn promise(&self) -> Promise {
        let common = self.sets[0].iter().any(|s| self.sets.iter().all(|a| a.contains(s)));
        if common {
            return Promise::Positive;
        }
        let disjoint = self
            .sets
            .iter()
            .enumerate()
            .all(|(i, a)| self.sets[i + 1..].iter().all(|b| a.is_disjoint(b)));
        if disjoint {
            Promise::Negative
        } else {
            Promise::Outside
        }
    }
}

/// Multi-minded bidders accepting `D_i^s` for `s ∈ A_i`, with `d = |A| - 1` copies.
pub fn disjointness_to_auction(
    di: &DisjointnessInstance,
    family: &PartitionFamily,
    bank: &AllocationBank,
    pair: &PairWitness,
) -> Result<(AuctionInstance, ReductionReport)> {
    let ground = bank.ground();
    let r = pair.bidders.len();
    if di.sets.len() != r {
        return input(format!("{} players but the pair has {r} bidders", di.sets.len()));
    }
    if family.parts != r || family.universe != pair.items.len() {
        return input(format!(
            "family must split |S| = {} elements into |A| = {r} parts",
            pair.items.len()
        ));
    }
    if family.len() < di.t {
        return input(format!("family has {} partitions, fewer than t = {}", family.len(), di.t));
    }
    if !verify_k_wise(family) {
        return Err(Error::Contract("the family lacks the k-wise intersection property".into()));
    }
    require_shattered(bank, pair)?;
    let items = pair.items.to_vec();
    let m = ground.items;
    let mut vals = vec![Valuation::zero(m)?; ground.bidders];
    for (i, &bidder) in pair.bidders.iter().enumerate() {
        let accepted = di.sets[i]
            .iter()
            .map(|&s| embed(family.partitions[s][i], &items))
            .collect();
        vals[bidder] = Valuation::multi_minded(m, accepted)?;
    }
    let inst = AuctionInstance::new(m, r - 1, vals)?;
    let (_, welfare) = bank.argmax_welfare(&inst.tables()?)?;
    let threshold = int(r as i64);
    let report = ReductionReport {
        decision: welfare == threshold,
        welfare,
        threshold,
        promise: di.promise(),
    };
    Ok((inst, report))
}
