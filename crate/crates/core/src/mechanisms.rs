//! Maximal-in-range mechanisms with Clarke payments, the greedy value-query
//! algorithm, the exhaustive welfare oracle and ratio measurement.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::allocations::{AllocationBank, DupAllocation};
use crate::bundle::{all_bundles, Bundle, MAX_ITEMS};
use crate::error::{input, Budget, Error, Result};
use crate::rational::Rational;
use crate::welfare::best_partition_exact;
use crate::valuations::{Metered, QueryLog, Valuation, ValueOracle, ValueTable};

/// Items, bidders, copies per item and one valuation per bidder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuctionInstance {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub valuations: Vec<Valuation>,
}

impl AuctionInstance {
    pub fn new(m: usize, d: usize, valuations: Vec<Valuation>) -> Result<Self> {
        if m == 0 || m > ValueTable::MAX_ITEMS {
            return input(format!("item count must be in 1..={}", ValueTable::MAX_ITEMS));
        }
        if d == 0 {
            return input("d must be at least 1");
        }
        if valuations.is_empty() {
            return input("an instance needs at least one bidder");
        }
        if let Some(i) = valuations.iter().position(|v| v.items() != m) {
            return input(format!("valuation {i} is over {} items, expected {m}", valuations[i].items()));
        }
        Ok(AuctionInstance {
            m,
            n: valuations.len(),
            d,
            valuations,
        })
    }

    pub fn tables(&self) -> Result<Vec<ValueTable>> {
        self.valuations.iter().map(ValueTable::of).collect()
    }

    /// The same instance with bidder `i` reporting `v` instead.
    pub fn with_bid(&self, i: usize, v: Valuation) -> Result<Self> {
        let mut vals = self.valuations.clone();
        vals[i] = v;
        AuctionInstance::new(self.m, self.d, vals)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            m: self.m,
            n: self.n,
            d: self.d,
            valuations: self.valuations.clone(),
        }
    }
}

/// On-disk instance: `{"m", "n", "d", "valuations"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub valuations: Vec<Valuation>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<AuctionInstance> {
        let f: InstanceFile = serde_json::from_str(text).map_err(|e| {
            Error::Input(format!("instance file, line {} column {}: {e}", e.line(), e.column()))
        })?;
        f.into_instance()
    }

    pub fn into_instance(self) -> Result<AuctionInstance> {
        if self.valuations.len() != self.n {
            return input(format!("n = {} but {} valuations given", self.n, self.valuations.len()));
        }
        AuctionInstance::new(self.m, self.d, self.valuations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub allocation: DupAllocation,
    #[serde(serialize_with = "ser_rationals")]
    pub payments: Vec<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub welfare: Rational,
}

pub(crate) fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::rational::to_pq(r))
}

pub(crate) fn ser_rationals<S: serde::Serializer>(r: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(crate::rational::to_pq))
}

fn check_ground(bank: &AllocationBank, inst: &AuctionInstance) -> Result<()> {
    let g = bank.ground();
    if g.items != inst.m || g.bidders != inst.n {
        return input(format!(
            "bank ground ({} items, {} bidders) does not match the instance ({}, {})",
            g.items, g.bidders, inst.m, inst.n
        ));
    }
    if g.dup_limit > inst.d {
        return input(format!("bank uses d = {} copies but the instance has d = {}", g.dup_limit, inst.d));
    }
    Ok(())
}

/// The welfare-maximizing bank member; ties go to the bank's canonical order.
pub fn mir_allocate(bank: &AllocationBank, inst: &AuctionInstance) -> Result<DupAllocation> {
    check_ground(bank, inst)?;
    Ok(bank.argmax_welfare(&inst.tables()?)?.0)
}

/// How payments are derived from the bank's welfare maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaymentRule {
    /// `p_i = max_{S} Σ_{j≠i} v_j(S_j) − Σ_{j≠i} v_j(chosen_j)`.
    Clarke,
    /// Groves payments without the pivot: `p_i = −Σ_{j≠i} v_j(chosen_j)`.
    WithoutPivot,
    /// Only the pivot: `p_i = max_{S} Σ_{j≠i} v_j(S_j)`; not truthful.
    WithoutCredit,
}

fn payments_from_tables(
    bank: &AllocationBank,
    tables: &[ValueTable],
    chosen: &DupAllocation,
    rule: PaymentRule,
) -> Result<Vec<Rational>> {
    let n = tables.len();
    let m = tables[0].items();
    (0..n)
        .map(|i| {
            let others_chosen: Rational = (0..n)
                .filter(|&j| j != i)
                .map(|j| tables[j].get(chosen.bundles[j]).clone())
                .sum();
            let pivot = || -> Result<Rational> {
                let mut without = tables.to_vec();
                without[i] = ValueTable::zeros(m);
                Ok(bank.argmax_welfare(&without)?.1)
            };
            Ok(match rule {
                PaymentRule::Clarke => pivot()? - others_chosen,
                PaymentRule::WithoutPivot => -others_chosen,
                PaymentRule::WithoutCredit => pivot()?,
            })
        })
        .collect()
}

/// Clarke pivot payments over the same bank.
pub fn vcg_payments(bank: &AllocationBank, inst: &AuctionInstance, chosen: &DupAllocation) -> Result<Vec<Rational>> {
    check_ground(bank, inst)?;
    payments_from_tables(bank, &inst.tables()?, chosen, PaymentRule::Clarke)
}

pub fn run_mir(bank: &AllocationBank, inst: &AuctionInstance) -> Result<Outcome> {
    run_mir_with(bank, inst, PaymentRule::Clarke)
}

pub fn run_mir_with(bank: &AllocationBank, inst: &AuctionInstance, rule: PaymentRule) -> Result<Outcome> {
    check_ground(bank, inst)?;
    let tables = inst.tables()?;
    let (allocation, welfare) = bank.argmax_welfare(&tables)?;
    let payments = payments_from_tables(bank, &tables, &allocation, rule)?;
    Ok(Outcome {
        allocation,
        payments,
        welfare,
    })
}

/// Shrinks `u` to `k` items by repeatedly dropping the item whose removal
/// keeps the value highest (lowest index on ties).
pub fn prune_to_k<V: ValueOracle + ?Sized>(v: &V, u: Bundle, k: usize) -> Result<Bundle> {
    if u.len() < k {
        return input(format!("cannot prune {} items down to {k}", u.len()));
    }
    let mut cur = u;
    if cur.len() == k {
        return Ok(cur);
    }
    let mut cur_value = v.query(cur);
    while cur.len() > k {
        let mut best: Option<(usize, Rational)> = None;
        for x in cur.items() {
            let val = v.query(cur.without(x));
            if val > cur_value {
                return Err(Error::Contract(format!(
                    "valuation is not monotone: removing item {x} from {cur:?} raises its value"
                )));
            }
            if best.as_ref().is_none_or(|(_, b)| val > *b) {
                best = Some((x, val));
            }
        }
        let (x, val) = best.expect("cur has more than k >= 0 items");
        cur = cur.without(x);
        cur_value = val;
    }
    Ok(cur)
}

/// The greedy value-query algorithm for k-local bidders (one copy per item).
pub fn greedy_k_local<V: ValueOracle>(oracles: &[V], k: usize) -> Result<DupAllocation> {
    if k == 0 {
        return input("k must be at least 1");
    }
    let n = oracles.len();
    let m = oracles.first().map_or(0, |o| o.items());
    if oracles.iter().any(|o| o.items() != m) {
        return input("all valuations must share the item count");
    }
    let mut alloc = DupAllocation::empty(n);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut u = Bundle::full(m);
    while !u.is_empty() && !remaining.is_empty() {
        let mut best: Option<(usize, Rational)> = None;
        for (pos, &i) in remaining.iter().enumerate() {
            let val = oracles[i].query(u);
            if best.as_ref().is_none_or(|(_, b)| val > *b) {
                best = Some((pos, val));
            }
        }
        let (pos, _) = best.expect("remaining is nonempty");
        let i = remaining.remove(pos);
        let s = if u.len() <= k { u } else { prune_to_k(&oracles[i], u, k)? };
        alloc.bundles[i] = s;
        u = u.difference(s);
    }
    Ok(alloc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreedyRun {
    pub allocation: DupAllocation,
    #[serde(serialize_with = "ser_rational")]
    pub welfare: Rational,
    pub queries: Vec<QueryLog>,
}

/// Runs [`greedy_k_local`] on metered handles to the instance's valuations.
pub fn greedy_on_instance(inst: &AuctionInstance, k: usize) -> Result<GreedyRun> {
    let handles: Vec<Metered> = inst.valuations.iter().map(Metered::new).collect();
    let allocation = greedy_k_local(&handles, k)?;
    let queries = handles.iter().map(Metered::log).collect();
    let welfare = allocation
        .bundles
        .iter()
        .zip(&inst.valuations)
        .map(|(b, v)| v.value_unchecked(*b))
        .sum();
    Ok(GreedyRun {
        allocation,
        welfare,
        queries,
    })
}

/// Maximum welfare with one copy per item; a zero dummy bidder absorbs unassigned items.
fn opt_single_copy(tables: &[ValueTable]) -> Rational {
    let m = tables[0].items();
    let mut rows: Vec<Vec<Rational>> = tables.iter().map(|t| t.values().to_vec()).collect();
    rows.push(vec![Rational::zero(); 1 << m]);
    let fixed = vec![0usize; rows.len()];
    best_partition_exact(&rows, m, &fixed)
}

/// Number of ways to hand each item to at most `d` of `n` bidders.
pub fn duplicate_allocation_count(m: usize, n: usize, d: usize) -> BigUint {
    let per_item: BigUint = (0..=d.min(n))
        .map(|j| num_integer::binomial(BigUint::from(n), BigUint::from(j)))
        .sum();
    num_traits::pow(per_item, m)
}

/// Exact optimum over every d-duplicate allocation, listing them item by item,
/// together with the first optimal allocation found.
pub fn opt_welfare_enumerated(inst: &AuctionInstance, budget: &Budget) -> Result<(Rational, DupAllocation)> {
    let (m, n, d) = (inst.m, inst.n, inst.d);
    budget.check("d-duplicate allocation enumeration", &duplicate_allocation_count(m, n, d))?;
    let tables = inst.tables()?;
    // Per-item choices: bidder subsets of size at most d, as bitmasks.
    let choices: Vec<u64> = (0u64..1 << n).filter(|s| (s.count_ones() as usize) <= d).collect();
    let mut idx = vec![0usize; m];
    let mut best: Option<(Rational, DupAllocation)> = None;
    loop {
        let mut alloc = DupAllocation::empty(n);
        for (x, &c) in idx.iter().enumerate() {
            let set = choices[c];
            for (i, b) in alloc.bundles.iter_mut().enumerate() {
                if set >> i & 1 == 1 {
                    *b = b.with(x);
                }
            }
        }
        let w = alloc.welfare(&tables);
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, alloc));
        }
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(best.expect("at least one allocation"));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Exact optimal welfare over d-duplicate allocations.
pub fn opt_welfare(inst: &AuctionInstance, budget: &Budget) -> Result<Rational> {
    if inst.d == 1 {
        let size = num_traits::pow(BigUint::from(3u8), inst.m) * BigUint::from(inst.n);
        budget.check("single-copy welfare optimization", &size)?;
        return Ok(opt_single_copy(&inst.tables()?));
    }
    Ok(opt_welfare_enumerated(inst, budget)?.0)
}

/// `OPT / achieved`, where a positive optimum against zero is infinite.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ratio {
    Finite(Rational),
    Infinite,
}

impl Ratio {
    pub fn of(opt: &Rational, achieved: &Rational) -> Option<Ratio> {
        match (opt.is_zero(), achieved.is_zero()) {
            (true, true) => None,
            (false, true) => Some(Ratio::Infinite),
            _ => Some(Ratio::Finite(opt / achieved)),
        }
    }

    pub fn at_most(&self, bound: &Rational) -> bool {
        matches!(self, Ratio::Finite(r) if r <= bound)
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ratio::Finite(r) => f.write_str(&crate::rational::to_pq(r)),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioRow {
    pub instance_id: usize,
    #[serde(serialize_with = "ser_rational")]
    pub opt: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub achieved: Rational,
    pub ratio: Option<Ratio>,
}

impl RatioRow {
    pub const CSV_HEADER: &'static str = "instanceId,opt,achieved,ratio";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{}",
            self.instance_id,
            crate::rational::to_pq(&self.opt),
            crate::rational::to_pq(&self.achieved),
            self.ratio.as_ref().map_or("nan".to_string(), Ratio::to_string)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    pub instances: usize,
    /// Instances where both the optimum and the mechanism got zero.
    pub skipped: usize,
    pub worst: Option<Ratio>,
    pub witness: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<RatioRow>,
}

impl RatioReport {
    pub fn new() -> Self {
        RatioReport {
            instances: 0,
            skipped: 0,
            worst: None,
            witness: None,
            rows: Vec::new(),
        }
    }

    /// Folds one instance into the report; ids should increase.
    pub fn record(&mut self, instance_id: usize, opt: Rational, achieved: Rational, keep_row: bool) {
        self.instances += 1;
        let ratio = Ratio::of(&opt, &achieved);
        match &ratio {
            None => self.skipped += 1,
            Some(r) => {
                if self.worst.as_ref().is_none_or(|w| r > w) {
                    self.worst = Some(r.clone());
                    self.witness = Some(instance_id);
                }
            }
        }
        if keep_row {
            self.rows.push(RatioRow {
                instance_id,
                opt,
                achieved,
                ratio,
            });
        }
    }

    /// True iff every examined ratio is at most `bound`.
    pub fn within(&self, bound: &Rational) -> bool {
        self.worst.as_ref().is_none_or(|w| w.at_most(bound))
    }
}

impl Default for RatioReport {
    fn default() -> Self {
        Self::new()
    }
}

/// Worst `OPT / achieved` of `solve` over `instances`.
pub fn measure_ratio<I, F>(instances: I, mut solve: F, budget: &Budget, keep_rows: bool) -> Result<RatioReport>
where
    I: IntoIterator<Item = AuctionInstance>,
    F: FnMut(&AuctionInstance) -> Result<Rational>,
{
    let mut report = RatioReport::new();
    for (id, inst) in instances.into_iter().enumerate() {
        let opt = opt_welfare(&inst, budget)?;
        let achieved = solve(&inst)?;
        report.record(id, opt, achieved, keep_rows);
    }
    Ok(report)
}

/// The bundles bidder `i` can win by bidding almost-single-minded on each `T`.
pub fn mir_menu(bank: &AllocationBank, inst: &AuctionInstance, i: usize, budget: &Budget) -> Result<BTreeSet<Bundle>> {
    check_ground(bank, inst)?;
    if i >= inst.n {
        return input(format!("bidder {i} outside [0, {})", inst.n));
    }
    if inst.m > MAX_ITEMS {
        return input("too many items");
    }
    budget.check_pow("menu extraction", 2, inst.m)?;
    let mut tables = inst.tables()?;
    let mut menu = BTreeSet::new();
    for t in all_bundles(inst.m) {
        tables[i] = ValueTable::of(&Valuation::almost_single_minded(inst.m, t)?)?;
        let (alloc, _) = bank.argmax_welfare(&tables)?;
        menu.insert(alloc.bundles[i]);
    }
    Ok(menu)
}

/// Utility of bidder `i` (true valuation `truth`) when the reported profile is `tables`.
fn utility(bank: &AllocationBank, tables: &[ValueTable], truth: &ValueTable, i: usize, rule: PaymentRule) -> Result<Rational> {
    let (alloc, _) = bank.argmax_welfare(tables)?;
    let pay = payments_from_tables(bank, tables, &alloc, rule)?;
    Ok(truth.get(alloc.bundles[i]) - &pay[i])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeResult {
    pub truthful: bool,
    #[serde(serialize_with = "ser_rational")]
    pub truthful_utility: Rational,
    /// Index into the deviation set of the first profitable deviation.
    pub violation: Option<usize>,
}

/// Checks that no report in `deviations` beats truthful bidding for bidder `i`.
pub fn truthfulness_probe(
    bank: &AllocationBank,
    inst: &AuctionInstance,
    i: usize,
    deviations: &[Valuation],
    rule: PaymentRule,
) -> Result<ProbeResult> {
    check_ground(bank, inst)?;
    if i >= inst.n {
        return input(format!("bidder {i} outside [0, {})", inst.n));
    }
    let mut tables = inst.tables()?;
    let truth = tables[i].clone();
    let truthful_utility = utility(bank, &tables, &truth, i, rule)?;
    for (idx, dev) in deviations.iter().enumerate() {
        if dev.items() != inst.m {
            return input(format!("deviation {idx} is over {} items", dev.items()));
        }
        tables[i] = ValueTable::of(dev)?;
        if utility(bank, &tables, &truth, i, rule)? > truthful_utility {
            return Ok(ProbeResult {
                truthful: false,
                truthful_utility,
                violation: Some(idx),
            });
        }
    }
    Ok(ProbeResult {
        truthful: true,
        truthful_utility,
        violation: None,
    })
}

/// True iff every Clarke payment is nonnegative and no truthful utility is negative.
pub fn individually_rational(inst: &AuctionInstance, outcome: &Outcome) -> Result<bool> {
    let tables = inst.tables()?;
    Ok(outcome
        .payments
        .iter()
        .enumerate()
        .all(|(i, p)| !p.is_negative() && tables[i].get(outcome.allocation.bundles[i]) >= p))
}
