mod common;

use kshatter::allocations::DupAllocation;
use kshatter::banks::{full_pair_bank, sqrt_bank, trivial_bank};
use kshatter::bundle::all_bundles;
use kshatter::fixtures::{deviation_grid, for_each_tuple, random_grid_table, random_k_local, rng, small_bundles};
use kshatter::mechanisms::*;
use kshatter::valuations::{Metered, Valuation};
use kshatter::{Budget, Bundle, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

fn brute_force_opt(inst: &AuctionInstance) -> Rational {
    let tables = inst.tables().unwrap();
    let mut best = Rational::zero();
    let bundles: Vec<Bundle> = all_bundles(inst.m).collect();
    for_each_tuple(bundles.len(), inst.n, |t| {
        let a = DupAllocation::new(t.iter().map(|&i| bundles[i]).collect());
        if a.max_multiplicity() <= inst.d {
            best = best.clone().max(a.welfare(&tables));
        }
    });
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn opt_welfare_matches_brute_force(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=3, d in 1usize..=3) {
        let mut r = rng(seed);
        let vals: Vec<Valuation> = (0..n).map(|_| random_grid_table(m, 4, &mut r)).collect();
        let inst = AuctionInstance::new(m, d, vals).unwrap();
        let budget = Budget::default();
        let expected = brute_force_opt(&inst);
        prop_assert_eq!(opt_welfare(&inst, &budget).unwrap(), expected.clone());
        prop_assert_eq!(opt_welfare_enumerated(&inst, &budget).unwrap().0, expected);
    }
}

#[test]
fn mir_output_beats_every_member() {
    let mut r = rng(3);
    let budget = Budget::default();
    for m in 1..=4 {
        for n in 1..=3 {
            let everyone: Vec<usize> = (0..n).collect();
            let banks = [
                trivial_bank(m, n).unwrap(),
                sqrt_bank(m, n).unwrap(),
                full_pair_bank(m, n, Bundle::full(m), &everyone).unwrap(),
            ];
            for bank in &banks {
                let members = bank.members(&budget).unwrap();
                for _ in 0..10 {
                    let vals = (0..n).map(|_| random_grid_table(m, 6, &mut r)).collect();
                    let inst = AuctionInstance::new(m, 1, vals).unwrap();
                    let tables = inst.tables().unwrap();
                    let out = run_mir(bank, &inst).unwrap();
                    assert!(members.iter().all(|a| a.welfare(&tables) <= out.welfare));
                    assert!(bank.contains(&out.allocation));
                    assert!(individually_rational(&inst, &out).unwrap());
                }
            }
        }
    }
}

#[test]
fn truthfulness_spot_check() {
    let mut r = rng(4);
    for m in 1..=3 {
        let grid = deviation_grid(m, 50, 9);
        for n in 1..=2 {
            let bank = sqrt_bank(m, n).unwrap();
            for _ in 0..3 {
                let vals = (0..n).map(|_| random_grid_table(m, 6, &mut r)).collect();
                let inst = AuctionInstance::new(m, 1, vals).unwrap();
                for i in 0..n {
                    assert!(truthfulness_probe(&bank, &inst, i, &grid, PaymentRule::Clarke).unwrap().truthful);
                }
            }
        }
    }
}

#[test]
fn greedy_guarantee_and_query_budget_on_small_grid() {
    let budget = Budget::default();
    for m in 1..=4 {
        for k in 1..=3usize.min(m) {
            let menu = small_bundles(m, k);
            for n in 1..=3 {
                for_each_tuple(menu.len(), n, |t| {
                    let vals = t.iter().map(|&i| Valuation::single_minded(m, menu[i]).unwrap()).collect();
                    let inst = AuctionInstance::new(m, 1, vals).unwrap();
                    let run = greedy_on_instance(&inst, k).unwrap();
                    let opt = opt_welfare(&inst, &budget).unwrap();
                    assert!(run.welfare.clone() * Rational::from_integer((2 * k as i64).into()) >= opt);
                    let queries: u64 = run.queries.iter().map(|q| q.count).sum();
                    assert!(queries as usize <= n * m + m.div_ceil(k) * m * m);
                });
            }
        }
    }
}

#[test]
fn prune_loss_is_within_slack() {
    let mut r = rng(12);
    for m in 2..=6 {
        for k in 1..=3usize.min(m) {
            for _ in 0..30 {
                let v = random_k_local(m, k, &mut r);
                let full = v.value(Bundle::full(m)).unwrap();
                let slack = full / Rational::from_integer((2 * m as i64).into());
                let u = loop {
                    let u = Bundle::from_bits(r.gen_range(0..1u64 << m));
                    if u.len() >= k {
                        break u;
                    }
                };
                let h = Metered::new(&v);
                let pruned = prune_to_k(&h, u, k).unwrap();
                assert_eq!(pruned.len(), k);
                assert!(pruned.is_subset_of(u));
                assert!(v.value(u).unwrap() - v.value(pruned).unwrap() <= slack);
                assert!(h.log().count as usize <= u.len() * u.len());
            }
        }
    }
}

#[test]
fn full_ground_bank_has_ratio_one() {
    let mut r = rng(13);
    let bank = full_pair_bank(3, 3, Bundle::full(3), &[0, 1, 2]).unwrap();
    let instances: Vec<AuctionInstance> = (0..40)
        .map(|_| AuctionInstance::new(3, 1, (0..3).map(|_| random_grid_table(3, 4, &mut r)).collect()).unwrap())
        .collect();
    let report = measure_ratio(instances, |i| Ok(bank.argmax_welfare(&i.tables()?)?.1), &Budget::default(), false).unwrap();
    assert!(report.worst.is_none() || report.worst == Some(Ratio::Finite(Rational::from_integer(1.into()))));
}

#[test]
fn trivial_menus_are_all_or_nothing() {
    let mut r = rng(14);
    let budget = Budget::default();
    for m in 1..=4 {
        let bank = trivial_bank(m, 3).unwrap();
        for _ in 0..5 {
            let vals = (0..3).map(|_| random_grid_table(m, 6, &mut r)).collect();
            let inst = AuctionInstance::new(m, 1, vals).unwrap();
            for i in 0..3 {
                let menu = mir_menu(&bank, &inst, i, &budget).unwrap();
                assert!(menu.iter().all(|s| s.is_empty() || *s == Bundle::full(m)));
            }
        }
    }
}
