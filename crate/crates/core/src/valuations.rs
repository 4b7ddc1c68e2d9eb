//! Exactly evaluable valuation functions and class-membership predicates.

use std::cell::Cell;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bundle::{all_bundles, combinations, Bundle, MAX_ITEMS};
use crate::error::{input, Error, Result};
use crate::lp;
use crate::rational::{parse_pq, to_pq, Rational};

/// Largest item count accepted by the exhaustive predicates.
pub const PREDICATE_MAX_ITEMS: usize = 16;
/// Largest item count accepted by [`is_xos`].
pub const XOS_MAX_ITEMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    /// `1[T ⊆ S]`.
    SingleMinded { m: usize, bundle: Bundle },
    /// 1 iff some listed bundle is contained in `S`.
    MultiMinded { m: usize, bundles: Vec<Bundle> },
    Additive { weights: Vec<Rational> },
    /// `|S ∩ support|`.
    ZeroOneAdditive { m: usize, support: Bundle },
    /// `min(w·χ(S), cap)`.
    CappedAdditive { weights: Vec<Rational>, cap: Rational },
    /// Maximum over additive clauses.
    Xos { m: usize, clauses: Vec<Vec<Rational>> },
    /// `1[T ⊆ S] + |S| / m^3`.
    AlmostSingleMinded { m: usize, bundle: Bundle },
    /// One value per bundle bitmask.
    ExplicitTable {
        m: usize,
        values: Vec<Rational>,
        monotone: bool,
    },
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 || m > MAX_ITEMS {
        return input(format!("item count must be in 1..={MAX_ITEMS}, got {m}"));
    }
    Ok(())
}

fn check_bundle(m: usize, b: Bundle, what: &str) -> Result<()> {
    if b.span() > m {
        return input(format!("{what} {b:?} uses an item outside [0, {m})"));
    }
    Ok(())
}

fn check_weights(w: &[Rational]) -> Result<()> {
    check_m(w.len())?;
    if let Some(x) = w.iter().position(|x| x.is_negative()) {
        return input(format!("weight of item {x} is negative"));
    }
    Ok(())
}

impl Valuation {
    pub fn single_minded(m: usize, bundle: Bundle) -> Result<Self> {
        check_m(m)?;
        check_bundle(m, bundle, "desired bundle")?;
        Ok(Valuation::SingleMinded { m, bundle })
    }

    pub fn multi_minded(m: usize, bundles: Vec<Bundle>) -> Result<Self> {
        check_m(m)?;
        for b in &bundles {
            check_bundle(m, *b, "accepted bundle")?;
        }
        Ok(Valuation::MultiMinded { m, bundles })
    }

    pub fn additive(weights: Vec<Rational>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Valuation::Additive { weights })
    }

    pub fn zero_one_additive(m: usize, support: Bundle) -> Result<Self> {
        check_m(m)?;
        check_bundle(m, support, "support")?;
        Ok(Valuation::ZeroOneAdditive { m, support })
    }

    pub fn capped_additive(weights: Vec<Rational>, cap: Rational) -> Result<Self> {
        check_weights(&weights)?;
        if cap.is_negative() {
            return input("cap must be nonnegative");
        }
        Ok(Valuation::CappedAdditive { weights, cap })
    }

    pub fn xos(m: usize, clauses: Vec<Vec<Rational>>) -> Result<Self> {
        check_m(m)?;
        for (j, c) in clauses.iter().enumerate() {
            if c.len() != m {
                return input(format!("clause {j} has {} weights, expected {m}", c.len()));
            }
            check_weights(c)?;
        }
        Ok(Valuation::Xos { m, clauses })
    }

    pub fn almost_single_minded(m: usize, bundle: Bundle) -> Result<Self> {
        check_m(m)?;
        check_bundle(m, bundle, "desired bundle")?;
        Ok(Valuation::AlmostSingleMinded { m, bundle })
    }

    /// A table indexed by bundle bitmask. Tables declared monotone are checked
    /// for `v(∅) = 0` and monotonicity.
    pub fn explicit_table(m: usize, values: Vec<Rational>, monotone: bool) -> Result<Self> {
        check_m(m)?;
        if m > PREDICATE_MAX_ITEMS + 4 {
            return input(format!("explicit tables are limited to {} items", PREDICATE_MAX_ITEMS + 4));
        }
        if values.len() != 1usize << m {
            return input(format!(
                "explicit table over {m} items needs {} values, got {}",
                1usize << m,
                values.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| v.is_negative()) {
            return input(format!("table entry {i} is negative"));
        }
        let v = Valuation::ExplicitTable {
            m,
            values,
            monotone,
        };
        if monotone {
            if !v.is_normalized_unchecked() {
                return input("table declared monotone must have v(∅) = 0");
            }
            if !v.is_monotone_unchecked() {
                return input("table declared monotone is not nondecreasing");
            }
        }
        Ok(v)
    }

    /// The all-zero valuation.
    pub fn zero(m: usize) -> Result<Self> {
        Valuation::zero_one_additive(m, Bundle::EMPTY)
    }

    pub fn items(&self) -> usize {
        match self {
            Valuation::SingleMinded { m, .. }
            | Valuation::MultiMinded { m, .. }
            | Valuation::ZeroOneAdditive { m, .. }
            | Valuation::Xos { m, .. }
            | Valuation::AlmostSingleMinded { m, .. }
            | Valuation::ExplicitTable { m, .. } => *m,
            Valuation::Additive { weights } | Valuation::CappedAdditive { weights, .. } => weights.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Valuation::SingleMinded { .. } => "single_minded",
            Valuation::MultiMinded { .. } => "multi_minded",
            Valuation::Additive { .. } => "additive",
            Valuation::ZeroOneAdditive { .. } => "zero_one_additive",
            Valuation::CappedAdditive { .. } => "capped_additive",
            Valuation::Xos { .. } => "xos",
            Valuation::AlmostSingleMinded { .. } => "almost_single_minded",
            Valuation::ExplicitTable { .. } => "explicit_table",
        }
    }

    /// Exact value of a bundle.
    pub fn value(&self, s: Bundle) -> Result<Rational> {
        check_bundle(self.items(), s, "queried bundle")?;
        Ok(self.value_unchecked(s))
    }

    pub(crate) fn value_unchecked(&self, s: Bundle) -> Rational {
        let sum = |w: &[Rational]| s.items().map(|x| &w[x]).sum::<Rational>();
        match self {
            Valuation::SingleMinded { bundle, .. } => indicator(bundle.is_subset_of(s)),
            Valuation::MultiMinded { bundles, .. } => {
                indicator(bundles.iter().any(|b| b.is_subset_of(s)))
            }
            Valuation::Additive { weights } => sum(weights),
            Valuation::ZeroOneAdditive { support, .. } => {
                Rational::from_integer(BigInt::from(s.intersection(*support).len()))
            }
            Valuation::CappedAdditive { weights, cap } => {
                let a = sum(weights);
                if a < *cap {
                    a
                } else {
                    cap.clone()
                }
            }
            Valuation::Xos { clauses, .. } => clauses
                .iter()
                .map(|c| sum(c))
                .max()
                .unwrap_or_else(Rational::zero),
            Valuation::AlmostSingleMinded { m, bundle } => {
                let m3 = BigInt::from(*m).pow(3);
                indicator(bundle.is_subset_of(s))
                    + Rational::new(BigInt::from(s.len()), m3)
            }
            Valuation::ExplicitTable { values, .. } => values[s.index()].clone(),
        }
    }

    /// All `2^m` values, indexed by bitmask.
    pub fn table(&self) -> Result<ValueTable> {
        ValueTable::of(self)
    }

    fn is_normalized_unchecked(&self) -> bool {
        self.value_unchecked(Bundle::EMPTY).is_zero()
    }

    fn is_monotone_unchecked(&self) -> bool {
        let m = self.items();
        all_bundles(m).all(|s| {
            let vs = self.value_unchecked(s);
            (0..m)
                .filter(|&x| !s.contains(x))
                .all(|x| vs <= self.value_unchecked(s.with(x)))
        })
    }

    pub fn to_spec(&self) -> ValuationSpec {
        let pq = |w: &[Rational]| w.iter().map(to_pq).collect::<Vec<_>>();
        match self {
            Valuation::SingleMinded { m, bundle } => ValuationSpec::SingleMinded { m: *m, bundle: *bundle },
            Valuation::MultiMinded { m, bundles } => ValuationSpec::MultiMinded {
                m: *m,
                bundles: bundles.clone(),
            },
            Valuation::Additive { weights } => ValuationSpec::Additive { weights: pq(weights) },
            Valuation::ZeroOneAdditive { m, support } => ValuationSpec::ZeroOneAdditive {
                weights: (0..*m).map(|x| support.contains(x) as u8).collect(),
            },
            Valuation::CappedAdditive { weights, cap } => ValuationSpec::CappedAdditive {
                weights: pq(weights),
                cap: to_pq(cap),
            },
            Valuation::Xos { m, clauses } => ValuationSpec::Xos {
                m: *m,
                clauses: clauses.iter().map(|c| pq(c)).collect(),
            },
            Valuation::AlmostSingleMinded { m, bundle } => {
                ValuationSpec::AlmostSingleMinded { m: *m, bundle: *bundle }
            }
            Valuation::ExplicitTable {
                m,
                values,
                monotone,
            } => ValuationSpec::ExplicitTable {
                m: *m,
                values: pq(values),
                monotone: *monotone,
            },
        }
    }
}

fn indicator(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// JSON form of a valuation: `{"kind": "...", ...}` with rationals as `"p/q"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValuationSpec {
    SingleMinded { m: usize, bundle: Bundle },
    MultiMinded { m: usize, bundles: Vec<Bundle> },
    Additive { weights: Vec<String> },
    ZeroOneAdditive { weights: Vec<u8> },
    CappedAdditive { weights: Vec<String>, cap: String },
    Xos { m: usize, clauses: Vec<Vec<String>> },
    AlmostSingleMinded { m: usize, bundle: Bundle },
    ExplicitTable {
        m: usize,
        values: Vec<String>,
        #[serde(default)]
        monotone: bool,
    },
}

impl TryFrom<ValuationSpec> for Valuation {
    type Error = Error;

    fn try_from(spec: ValuationSpec) -> Result<Self> {
        let parse = |w: &[String]| w.iter().map(|s| parse_pq(s)).collect::<Result<Vec<_>>>();
        match spec {
            ValuationSpec::SingleMinded { m, bundle } => Valuation::single_minded(m, bundle),
            ValuationSpec::MultiMinded { m, bundles } => Valuation::multi_minded(m, bundles),
            ValuationSpec::Additive { weights } => Valuation::additive(parse(&weights)?),
            ValuationSpec::ZeroOneAdditive { weights } => {
                if let Some(x) = weights.iter().position(|&w| w > 1) {
                    return input(format!("0/1 weight of item {x} is not 0 or 1"));
                }
                let support = Bundle::from_items(
                    weights.iter().enumerate().filter(|(_, &w)| w == 1).map(|(x, _)| x),
                );
                Valuation::zero_one_additive(weights.len(), support)
            }
            ValuationSpec::CappedAdditive { weights, cap } => {
                Valuation::capped_additive(parse(&weights)?, parse_pq(&cap)?)
            }
            ValuationSpec::Xos { m, clauses } => Valuation::xos(
                m,
                clauses.iter().map(|c| parse(c)).collect::<Result<Vec<_>>>()?,
            ),
            ValuationSpec::AlmostSingleMinded { m, bundle } => Valuation::almost_single_minded(m, bundle),
            ValuationSpec::ExplicitTable {
                m,
                values,
                monotone,
            } => Valuation::explicit_table(m, parse(&values)?, monotone),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = ValuationSpec::deserialize(d)?;
        Valuation::try_from(spec).map_err(serde::de::Error::custom)
    }
}

/// Precomputed values of every bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTable {
    m: usize,
    values: Vec<Rational>,
}

impl ValueTable {
    /// Tables are materialized up to this many items.
    pub const MAX_ITEMS: usize = 20;

    pub fn of(v: &Valuation) -> Result<Self> {
        let m = v.items();
        if m > Self::MAX_ITEMS {
            return Err(Error::Budget {
                what: "value table".into(),
                attempted: num_bigint::BigUint::from(1u8) << m,
                cap: 1u128 << Self::MAX_ITEMS,
            });
        }
        let values = match v {
            Valuation::ExplicitTable { values, .. } => values.clone(),
            _ => all_bundles(m).map(|s| v.value_unchecked(s)).collect(),
        };
        Ok(ValueTable { m, values })
    }

    pub fn from_fn(m: usize, f: impl Fn(Bundle) -> Rational) -> Self {
        ValueTable {
            m,
            values: all_bundles(m).map(f).collect(),
        }
    }

    pub fn zeros(m: usize) -> Self {
        ValueTable {
            m,
            values: vec![Rational::zero(); 1usize << m],
        }
    }

    pub fn items(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, s: Bundle) -> &Rational {
        &self.values[s.index()]
    }
}

/// Count of value queries issued through a [`Metered`] handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct QueryLog {
    pub count: u64,
}

/// Black-box access to a valuation through value queries only.
pub trait ValueOracle {
    fn items(&self) -> usize;
    fn query(&self, s: Bundle) -> Rational;
}

/// A valuation handle that counts every value query it answers.
#[derive(Debug)]
pub struct Metered<'a> {
    valuation: &'a Valuation,
    count: Cell<u64>,
}

impl<'a> Metered<'a> {
    pub fn new(valuation: &'a Valuation) -> Self {
        Metered {
            valuation,
            count: Cell::new(0),
        }
    }

    pub fn log(&self) -> QueryLog {
        QueryLog {
            count: self.count.get(),
        }
    }
}

impl ValueOracle for Metered<'_> {
    fn items(&self) -> usize {
        self.valuation.items()
    }

    fn query(&self, s: Bundle) -> Rational {
        self.count.set(self.count.get() + 1);
        self.valuation.value_unchecked(s)
    }
}

fn predicate_table(v: &Valuation, limit: usize, what: &str) -> Result<ValueTable> {
    let m = v.items();
    if m > limit {
        return Err(Error::Budget {
            what: format!("{what} over {m} items"),
            attempted: num_bigint::BigUint::from(1u8) << m,
            cap: 1u128 << limit,
        });
    }
    ValueTable::of(v)
}

pub fn is_normalized(v: &Valuation) -> Result<bool> {
    Ok(v.value(Bundle::EMPTY)?.is_zero())
}

/// `S ⊆ T ⇒ v(S) <= v(T)`, checked on every single-item extension.
pub fn is_monotone(v: &Valuation) -> Result<bool> {
    let t = predicate_table(v, PREDICATE_MAX_ITEMS, "monotonicity check")?;
    let m = t.m;
    Ok(all_bundles(m).all(|s| {
        (0..m)
            .filter(|&x| !s.contains(x))
            .all(|x| t.get(s) <= t.get(s.with(x)))
    }))
}

/// `v(S ∪ T) <= v(S) + v(T) - v(S ∩ T)` for all `S, T`.
///
/// Checked through the equivalent local form
/// `v(S+x) + v(S+y) >= v(S+x+y) + v(S)` for `x ≠ y ∉ S`.
pub fn is_submodular(v: &Valuation) -> Result<bool> {
    let t = predicate_table(v, PREDICATE_MAX_ITEMS, "submodularity check")?;
    let m = t.m;
    Ok(all_bundles(m).all(|s| {
        let outside: Vec<usize> = (0..m).filter(|&x| !s.contains(x)).collect();
        outside.iter().enumerate().all(|(i, &x)| {
            outside[i + 1..].iter().all(|&y| {
                t.get(s.with(x)) + t.get(s.with(y)) >= t.get(s.with(x).with(y)) + t.get(s)
            })
        })
    }))
}

/// `v(S ∪ T) <= v(S) + v(T)` for all disjoint `S, T`.
pub fn is_subadditive(v: &Valuation) -> Result<bool> {
    let t = predicate_table(v, PREDICATE_MAX_ITEMS, "subadditivity check")?;
    let m = t.m;
    Ok(all_bundles(m).all(|u| u.subsets().all(|s| t.get(u) <= &(t.get(s) + t.get(u.difference(s))))))
}

/// `v([m]) / (2 m^2)`: the loss a k-local valuation may suffer when
/// restricted to its core.
pub fn k_local_slack(v_full: &Rational, m: usize) -> Rational {
    v_full / Rational::from_integer(BigInt::from(2 * m * m))
}

/// First core `T` (lexicographic among size-`k` sets) witnessing k-locality.
pub fn k_local_core(v: &Valuation, k: usize) -> Result<Option<Bundle>> {
    let t = predicate_table(v, PREDICATE_MAX_ITEMS, "k-locality check")?;
    let m = t.m;
    if k > m {
        return input(format!("k = {k} exceeds the item count {m}"));
    }
    let slack = k_local_slack(t.get(Bundle::full(m)), m);
    Ok(combinations(m, k).find(|&core| {
        all_bundles(m).all(|s| t.get(s.intersection(core)) + &slack >= *t.get(s))
    }))
}

pub fn is_k_local(v: &Valuation, k: usize) -> Result<bool> {
    Ok(k_local_core(v, k)?.is_some())
}

/// Decides membership in XOS exactly.
///
/// `v` is XOS iff every bundle `S` has a supporting clause: `w >= 0` with
/// `w·χ(S) = v(S)` and `w·χ(T) <= v(T)` for every `T`. Weights outside `S`
/// can be taken as zero, which leaves one linear program per bundle over the
/// items of `S`, solved by exact simplex.
pub fn is_xos(v: &Valuation) -> Result<bool> {
    let t = predicate_table(v, XOS_MAX_ITEMS, "XOS check")?;
    let m = t.m;
    for s in all_bundles(m) {
        if !has_supporting_clause(&t, m, s) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn has_supporting_clause(t: &ValueTable, m: usize, s: Bundle) -> bool {
    let items = s.to_vec();
    // cap[T'] = min { v(T) : T ∩ S = T' } for T' ⊆ S.
    let outside = Bundle::full(m).difference(s);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for sub in s.subsets() {
        let cap = outside
            .subsets()
            .map(|o| t.get(sub.union(o)))
            .min()
            .expect("at least the empty extension")
            .clone();
        if cap.is_negative() {
            return false;
        }
        if sub.is_empty() {
            continue;
        }
        rows.push(
            items
                .iter()
                .map(|&x| if sub.contains(x) { Rational::one() } else { Rational::zero() })
                .collect(),
        );
        rhs.push(cap);
    }
    if items.is_empty() {
        return t.get(s).is_zero();
    }
    let ones = vec![Rational::one(); items.len()];
    match lp::maximize(&ones, &rows, &rhs) {
        Some(best) => best == *t.get(s),
        None => false,
    }
}
