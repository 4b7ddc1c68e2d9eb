//! k-shattering, the k-dimension and the generalized Sauer–Shelah bound.
//!
//! A class is a finite set of total functions `[m] -> [n]`. A point set `A`
//! is k-shattered when every point `a` can be given a menu `Y_a` of `k`
//! labels such that every labeling drawn from the menus is realized, on `A`,
//! by some member of the class.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{pow, Zero};
use serde::{Deserialize, Serialize};

use crate::bundle::combinations;
use crate::error::{input, Budget, Error, Result};

pub type Label = u16;

/// Domain size `m` and label count `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundPair {
    pub points: usize,
    pub labels: usize,
}

impl GroundPair {
    pub fn new(points: usize, labels: usize) -> Result<Self> {
        if points == 0 || labels == 0 {
            return input(format!(
                "ground needs at least one point and one label, got m={points}, n={labels}"
            ));
        }
        if labels > Label::MAX as usize + 1 {
            return input(format!("too many labels: {labels}"));
        }
        Ok(GroundPair { points, labels })
    }
}

/// A single function `h : [m] -> [n]`, stored as its value vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledFunction(pub Vec<Label>);

impl LabeledFunction {
    pub fn values(&self) -> &[Label] {
        &self.0
    }

    pub fn restrict(&self, points: &[usize]) -> Vec<Label> {
        points.iter().map(|&p| self.0[p]).collect()
    }
}

/// A deduplicated set of functions over a common ground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionClass {
    ground: GroundPair,
    functions: Vec<LabeledFunction>,
}

impl FunctionClass {
    /// Builds a class, rejecting malformed or repeated rows by index.
    pub fn new(ground: GroundPair, rows: Vec<Vec<Label>>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        let mut functions = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ground.points {
                return input(format!(
                    "row {i} has length {} but m = {}",
                    row.len(),
                    ground.points
                ));
            }
            if let Some(&y) = row.iter().find(|&&y| y as usize >= ground.labels) {
                return input(format!(
                    "row {i} uses label {y} outside [0, {})",
                    ground.labels
                ));
            }
            if !seen.insert(row.clone()) {
                return input(format!("row {i} duplicates an earlier row"));
            }
            functions.push(LabeledFunction(row));
        }
        Ok(FunctionClass { ground, functions })
    }

    /// Builds a class from rows known to be well formed, dropping repeats.
    pub fn from_rows_dedup<I: IntoIterator<Item = Vec<Label>>>(ground: GroundPair, rows: I) -> Self {
        let mut seen = HashSet::new();
        let functions = rows
            .into_iter()
            .filter(|r| seen.insert(r.clone()))
            .map(LabeledFunction)
            .collect();
        FunctionClass { ground, functions }
    }

    /// Every function `[m] -> [n]`.
    pub fn full(ground: GroundPair, budget: &Budget) -> Result<Self> {
        budget.check_pow("full function class", ground.labels, ground.points)?;
        let rows = all_functions(ground.points, ground.labels);
        Ok(FunctionClass::from_rows_dedup(ground, rows))
    }

    /// The `n` constant functions.
    pub fn constants(ground: GroundPair) -> Self {
        let rows = (0..ground.labels).map(|y| vec![y as Label; ground.points]);
        FunctionClass::from_rows_dedup(ground, rows)
    }

    pub fn ground(&self) -> GroundPair {
        self.ground
    }

    pub fn functions(&self) -> &[LabeledFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Distinct restrictions of the class to `points` (in the given order).
    pub fn projection(&self, points: &[usize]) -> HashSet<Vec<Label>> {
        self.functions.iter().map(|h| h.restrict(points)).collect()
    }

    pub fn to_file(&self) -> FunctionClassFile {
        FunctionClassFile {
            m: self.ground.points,
            n_labels: self.ground.labels,
            functions: self.functions.iter().map(|f| f.0.clone()).collect(),
        }
    }
}

/// Every vector in `[n]^m`, lexicographic.
pub fn all_functions(m: usize, n: usize) -> impl Iterator<Item = Vec<Label>> {
    (0..m)
        .map(|_| 0..n as Label)
        .multi_cartesian_product()
        .chain(if m == 0 { Some(Vec::new()) } else { None })
}

/// On-disk form: `{"m": .., "nLabels": .., "functions": [[..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionClassFile {
    pub m: usize,
    #[serde(rename = "nLabels")]
    pub n_labels: usize,
    pub functions: Vec<Vec<Label>>,
}

impl FunctionClassFile {
    pub fn into_class(self) -> Result<FunctionClass> {
        FunctionClass::new(GroundPair::new(self.m, self.n_labels)?, self.functions)
    }

    pub fn parse(text: &str) -> Result<FunctionClass> {
        let file: FunctionClassFile = serde_json::from_str(text).map_err(|e| {
            Error::Input(format!(
                "class file: {e} (line {}, column {})",
                e.line(),
                e.column()
            ))
        })?;
        file.into_class()
    }
}

/// Points `A` with a `k`-label menu per point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterWitness {
    pub points: Vec<usize>,
    #[serde(rename = "labelSets")]
    pub label_sets: Vec<Vec<Label>>,
}

impl ShatterWitness {
    fn validate(&self, ground: GroundPair) -> Result<()> {
        if self.points.len() != self.label_sets.len() {
            return input("witness needs exactly one label set per point");
        }
        let mut seen = HashSet::new();
        for &p in &self.points {
            if p >= ground.points {
                return input(format!("witness point {p} outside [0, {})", ground.points));
            }
            if !seen.insert(p) {
                return input(format!("witness point {p} repeated"));
            }
        }
        let k = self.label_sets.first().map(Vec::len);
        for ys in &self.label_sets {
            if Some(ys.len()) != k {
                return input("all label sets of a witness must have the same size k");
            }
            let distinct: HashSet<_> = ys.iter().collect();
            if distinct.len() != ys.len() {
                return input("label set repeats a label");
            }
            if let Some(&y) = ys.iter().find(|&&y| y as usize >= ground.labels) {
                return input(format!("witness label {y} outside [0, {})", ground.labels));
            }
        }
        if let Some(k) = k {
            if k < 2 {
                return input(format!("label sets must have size k >= 2, got {k}"));
            }
        }
        Ok(())
    }
}

fn check_k(ground: GroundPair, k: usize) -> Result<()> {
    if k < 2 || k > ground.labels {
        return input(format!(
            "k must satisfy 2 <= k <= nLabels = {}, got {k}",
            ground.labels
        ));
    }
    Ok(())
}

/// True iff every labeling drawn from the witness menus is a restriction of the class.
pub fn is_k_shattered(class: &FunctionClass, witness: &ShatterWitness) -> Result<bool> {
    witness.validate(class.ground)?;
    let proj = class.projection(&witness.points);
    Ok(witness
        .label_sets
        .iter()
        .map(|ys| ys.iter().copied())
        .multi_cartesian_product()
        .chain(if witness.points.is_empty() { Some(Vec::new()) } else { None })
        .all(|f| proj.contains(&f)))
}

/// Lexicographically first witness on exactly `points` with menus of size `k`.
///
/// Menus are tried per point as sorted k-subsets in lexicographic order, the
/// first point most significant. Prefix projections prune the search without
/// changing which witness is found first.
pub fn find_k_shatter_witness(
    class: &FunctionClass,
    points: &[usize],
    k: usize,
) -> Result<Option<ShatterWitness>> {
    let ground = class.ground;
    check_k(ground, k)?;
    let mut seen = HashSet::new();
    for &p in points {
        if p >= ground.points {
            return input(format!("point {p} outside [0, {})", ground.points));
        }
        if !seen.insert(p) {
            return input(format!("point {p} repeated"));
        }
    }
    if class.is_empty() {
        return Ok(None);
    }
    if points.is_empty() {
        return Ok(Some(ShatterWitness {
            points: Vec::new(),
            label_sets: Vec::new(),
        }));
    }

    let prefix_proj: Vec<HashSet<Vec<Label>>> = (1..=points.len())
        .map(|j| class.projection(&points[..j]))
        .collect();
    let menus: Vec<Vec<Vec<Label>>> = points
        .iter()
        .map(|&p| {
            let present: std::collections::BTreeSet<Label> =
                class.functions.iter().map(|h| h.0[p]).collect();
            present.into_iter().combinations(k).collect()
        })
        .collect();

    let mut chosen: Vec<Vec<Label>> = Vec::with_capacity(points.len());
    if search_menus(&menus, &prefix_proj, &mut chosen) {
        Ok(Some(ShatterWitness {
            points: points.to_vec(),
            label_sets: chosen,
        }))
    } else {
        Ok(None)
    }
}

fn search_menus(
    menus: &[Vec<Vec<Label>>],
    prefix_proj: &[HashSet<Vec<Label>>],
    chosen: &mut Vec<Vec<Label>>,
) -> bool {
    let j = chosen.len();
    if j == menus.len() {
        return true;
    }
    for menu in &menus[j] {
        chosen.push(menu.clone());
        let ok = chosen
            .iter()
            .map(|ys| ys.iter().copied())
            .multi_cartesian_product()
            .all(|f| prefix_proj[j].contains(&f));
        if ok && search_menus(menus, prefix_proj, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Dimension together with the lexicographically first maximal witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionReport {
    pub k: usize,
    pub dim: usize,
    pub witness: Option<ShatterWitness>,
}

/// Largest size of a k-shattered point set, with a witness for it.
///
/// Sizes are scanned upward and the scan stops at the first size with no
/// shattered subset: subsets of k-shattered sets are k-shattered.
pub fn dim_k_with_witness(class: &FunctionClass, k: usize) -> Result<DimensionReport> {
    let ground = class.ground;
    check_k(ground, k)?;
    let mut best: Option<ShatterWitness> = None;
    let mut dim = 0;
    if !class.is_empty() {
        for size in 1..=ground.points {
            let mut found = None;
            for subset in combinations(ground.points, size) {
                if let Some(w) = find_k_shatter_witness(class, &subset.to_vec(), k)? {
                    found = Some(w);
                    break;
                }
            }
            match found {
                Some(w) => {
                    dim = size;
                    best = Some(w);
                }
                None => break,
            }
        }
    }
    Ok(DimensionReport {
        k,
        dim,
        witness: best,
    })
}

pub fn dim_k(class: &FunctionClass, k: usize) -> Result<usize> {
    Ok(dim_k_with_witness(class, k)?.dim)
}

/// Classic VC dimension; binary label sets only.
pub fn vc_dim(class: &FunctionClass) -> Result<usize> {
    if class.ground.labels != 2 {
        return input(format!(
            "VC dimension needs exactly 2 labels, class has {}",
            class.ground.labels
        ));
    }
    dim_k(class, 2)
}

pub fn natarajan_dim(class: &FunctionClass) -> Result<usize> {
    dim_k(class, 2)
}

pub fn steele_dim(class: &FunctionClass) -> Result<usize> {
    dim_k(class, class.ground.labels)
}

fn check_bound_params(m: usize, n: usize, k: usize, d: usize) -> Result<()> {
    if d > m {
        return input(format!("need 0 <= d <= m, got d={d}, m={m}"));
    }
    if k < 2 || k > n {
        return input(format!("need 2 <= k <= n, got k={k}, n={n}"));
    }
    Ok(())
}

/// `sum_{i=0..d} C(m,i) (k-1)^(m-i) C(n,k)^i`, exactly.
pub fn sauer_bound(m: usize, n: usize, k: usize, d: usize) -> Result<BigUint> {
    check_bound_params(m, n, k, d)?;
    let menus = binomial(BigUint::from(n), BigUint::from(k));
    let below = BigUint::from(k - 1);
    Ok((0..=d)
        .map(|i| {
            binomial(BigUint::from(m), BigUint::from(i))
                * pow(below.clone(), m - i)
                * pow(menus.clone(), i)
        })
        .sum())
}

/// Value used for `N(j, j)` when unrolling the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalBase {
    /// `(k-1 + C(n,k))^j`: the closed form at `d = m`; equals `n^j` when `k = n`.
    Binomial,
    /// `n^j`: the size of the full class `[n]^[j]`.
    FullClass,
}

/// Unrolls `N(d,m) = (k-1) N(d,m-1) + C(n,k) N(d-1,m-1)` with `N(0,j) = (k-1)^j`.
pub fn recursion_bound_with(
    m: usize,
    n: usize,
    k: usize,
    d: usize,
    diagonal: DiagonalBase,
) -> Result<BigUint> {
    check_bound_params(m, n, k, d)?;
    let menus = binomial(BigUint::from(n), BigUint::from(k));
    let below = BigUint::from(k - 1);
    let diag = |j: usize| match diagonal {
        DiagonalBase::Binomial => pow(below.clone() + menus.clone(), j),
        DiagonalBase::FullClass => pow(BigUint::from(n), j),
    };
    // table[e][j] = N(e, j) for e <= d, e <= j <= m.
    let mut table: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); m + 1]; d + 1];
    for j in 0..=m {
        table[0][j] = pow(below.clone(), j);
    }
    for e in 1..=d {
        table[e][e] = diag(e);
        for j in e + 1..=m {
            table[e][j] = &below * &table[e][j - 1] + &menus * &table[e - 1][j - 1];
        }
    }
    Ok(table[d][m].clone())
}

/// The recursion with the binomial diagonal; agrees with [`sauer_bound`].
pub fn recursion_bound(m: usize, n: usize, k: usize, d: usize) -> Result<BigUint> {
    recursion_bound_with(m, n, k, d, DiagonalBase::Binomial)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SauerReport {
    pub size: usize,
    pub dim: usize,
    #[serde(serialize_with = "crate::rational::ser_display")]
    pub bound: BigUint,
    pub holds: bool,
}

/// Compares `|class|` to the bound evaluated at the class's own k-dimension.
pub fn check_sauer(class: &FunctionClass, k: usize) -> Result<SauerReport> {
    let dim = dim_k(class, k)?;
    let g = class.ground;
    let bound = sauer_bound(g.points, g.labels, k, dim)?;
    let size = class.len();
    Ok(SauerReport {
        size,
        dim,
        holds: BigUint::from(size) <= bound,
        bound,
    })
}

/// Functions sending at most `d` points into the top labels `k-1 ..= n-1`.
pub fn tightness_class(m: usize, n: usize, k: usize, d: usize, budget: &Budget) -> Result<FunctionClass> {
    check_bound_params(m, n, k, d)?;
    let ground = GroundPair::new(m, n)?;
    budget.check_pow("tightness class enumeration", n, m)?;
    let high = (k - 1) as Label;
    let rows = all_functions(m, n).filter(|f| f.iter().filter(|&&y| y >= high).count() <= d);
    Ok(FunctionClass::from_rows_dedup(ground, rows))
}

/// `sum_{i=0..d} C(m,i) (k-1)^(m-i) (n+1-k)^i`: the size of [`tightness_class`].
pub fn tightness_size(m: usize, n: usize, k: usize, d: usize) -> Result<BigUint> {
    check_bound_params(m, n, k, d)?;
    Ok((0..=d)
        .map(|i| {
            binomial(BigUint::from(m), BigUint::from(i))
                * pow(BigUint::from(k - 1), m - i)
                * pow(BigUint::from(n + 1 - k), i)
        })
        .sum())
}
