//! Shared helpers for the integration tests.
#![allow(dead_code)]

use kshatter::allocations::{AllocationBank, AuctionGround, DupAllocation};
use kshatter::banks::{full_pair_bank, hy_bank, random_hy, sqrt_bank, trivial_bank};
use kshatter::{Bundle, Rational};
use rand::Rng;

/// Plain assignment vectors, `None` for unassigned, in lexicographic order.
pub fn assignments(m: usize, n: usize, partial: bool) -> Vec<Vec<Option<usize>>> {
    let symbols = n + partial as usize;
    let mut out = Vec::new();
    let total = symbols.pow(m as u32);
    for code in 0..total {
        let mut c = code;
        let mut a = vec![None; m];
        for x in (0..m).rev() {
            let s = c % symbols;
            c /= symbols;
            a[x] = (s < n).then_some(s);
        }
        out.push(a);
    }
    out
}

pub fn to_bundles(a: &[Option<usize>], n: usize) -> Vec<Bundle> {
    let mut b = vec![Bundle::EMPTY; n];
    for (x, y) in a.iter().enumerate() {
        if let Some(y) = y {
            b[*y] = b[*y].with(x);
        }
    }
    b
}

pub fn random_explicit_bank(m: usize, n: usize, size: usize, rng: &mut impl Rng) -> AllocationBank {
    let g = AuctionGround::new(m, n, 1).unwrap();
    let allocs = (0..size)
        .map(|_| {
            let a: Vec<Option<usize>> = (0..m).map(|_| {
                let s = rng.gen_range(0..=n);
                (s < n).then_some(s)
            }).collect();
            DupAllocation::new(to_bundles(&a, n))
        })
        .collect();
    AllocationBank::explicit_dedup(g, allocs).unwrap()
}

/// The standard banks over a ground, plus a random one.
pub fn fixture_banks(m: usize, n: usize, rng: &mut impl Rng) -> Vec<(String, AllocationBank)> {
    let everyone: Vec<usize> = (0..n).collect();
    let mut banks = vec![
        ("trivial".to_string(), trivial_bank(m, n).unwrap()),
        ("sqrt".to_string(), sqrt_bank(m, n).unwrap()),
        ("full".to_string(), full_pair_bank(m, n, Bundle::full(m), &everyone).unwrap()),
        ("random".to_string(), random_explicit_bank(m, n, 12, rng)),
    ];
    if m >= 2 && n >= 2 {
        banks.push((
            "partial-full".to_string(),
            full_pair_bank(m, n, Bundle::from_items(0..m - 1), &everyone[..2]).unwrap(),
        ));
    }
    if n % 2 == 0 {
        banks.push(("hy".to_string(), hy_bank(random_hy(m, n, 2, rng.gen()).unwrap()).unwrap()));
    }
    banks
}

pub fn q(n: i64, d: i64) -> Rational {
    kshatter::rational::frac(n, d)
}
