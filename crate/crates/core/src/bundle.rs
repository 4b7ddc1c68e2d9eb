//! Item bundles as bitmasks over at most 64 items.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const MAX_ITEMS: usize = 64;

/// A subset of `[m]`, bit `x` set iff item `x` is in the bundle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bundle(u64);

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn from_bits(bits: u64) -> Self {
        Bundle(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_ITEMS);
        if m == MAX_ITEMS {
            Bundle(u64::MAX)
        } else {
            Bundle((1u64 << m) - 1)
        }
    }

    pub fn singleton(x: usize) -> Self {
        Bundle(1u64 << x)
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        Bundle(items.into_iter().fold(0u64, |acc, x| acc | (1u64 << x)))
    }

    pub fn contains(self, x: usize) -> bool {
        x < MAX_ITEMS && self.0 >> x & 1 == 1
    }

    pub fn with(self, x: usize) -> Self {
        Bundle(self.0 | 1u64 << x)
    }

    pub fn without(self, x: usize) -> Self {
        Bundle(self.0 & !(1u64 << x))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Bundle) -> Self {
        Bundle(self.0 | other.0)
    }

    pub fn intersection(self, other: Bundle) -> Self {
        Bundle(self.0 & other.0)
    }

    pub fn difference(self, other: Bundle) -> Self {
        Bundle(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Bundle) -> bool {
        self.0 & other.0 == 0
    }

    /// Largest item index + 1, or 0 for the empty bundle.
    pub fn span(self) -> usize {
        MAX_ITEMS - self.0.leading_zeros() as usize
    }

    pub fn items(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let x = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(x)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.items().collect()
    }

    /// Every subset of `self`, in increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = Bundle> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(Bundle(cur))
        })
    }
}

/// All bundles over `m` items, by bitmask.
pub fn all_bundles(m: usize) -> impl Iterator<Item = Bundle> {
    Bundle::full(m).subsets()
}

/// Size-`size` subsets of `[m]` in lexicographic order of their sorted item lists.
pub fn combinations(m: usize, size: usize) -> impl Iterator<Item = Bundle> {
    (0..m).combinations(size).map(Bundle::from_items)
}

/// Size-`size` subsets of `within`, lexicographic by sorted item list.
pub fn combinations_within(within: Bundle, size: usize) -> impl Iterator<Item = Bundle> {
    within.to_vec().into_iter().combinations(size).map(Bundle::from_items)
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.items()).finish()
    }
}

impl Serialize for Bundle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.items())
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(d)?;
        if let Some(&x) = items.iter().find(|&&x| x >= MAX_ITEMS) {
            return Err(serde::de::Error::custom(format!(
                "item {x} exceeds the {MAX_ITEMS}-item limit"
            )));
        }
        Ok(Bundle::from_items(items))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerates_every_submask_once() {
        let b = Bundle::from_items([1, 3, 4]);
        let subs: Vec<_> = b.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|s| s.is_subset_of(b)));
        assert_eq!(subs[0], Bundle::EMPTY);
        assert_eq!(*subs.last().unwrap(), b);
        assert_eq!(Bundle::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn combinations_are_lexicographic() {
        let c: Vec<_> = combinations(4, 2).map(|b| b.to_vec()).collect();
        assert_eq!(
            c,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }

    #[test]
    fn full_and_span() {
        assert_eq!(Bundle::full(3).bits(), 0b111);
        assert_eq!(Bundle::full(64).len(), 64);
        assert_eq!(Bundle::from_items([0, 5]).span(), 6);
        assert_eq!(Bundle::EMPTY.span(), 0);
    }
}
