//! Named invariant suites for `kshatter verify`.

use num_bigint::BigUint;
use serde::Serialize;

use kshatter::banks::{intersection_family, trivial_bank};
use kshatter::fixtures::{deviation_grid, disjoint_singleton_profiles, for_each_tuple, random_class, rng, single_minded_menu};
use kshatter::mechanisms::{
    greedy_on_instance, measure_ratio, mir_allocate, opt_welfare, truthfulness_probe, AuctionInstance, PaymentRule,
    Ratio,
};
use kshatter::rational::int;
use kshatter::shattering::{check_sauer, dim_k, recursion_bound, sauer_bound, tightness_class};
use kshatter::{Budget, Error, Result};

pub const SUITES: &[&str] = &[
    "sauer-grid",
    "recursion-grid",
    "tightness-grid",
    "greedy-grid",
    "trivial-ratio",
    "intersection-family",
    "truthfulness",
];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub checks: usize,
    pub violations: usize,
    pub first_violation: Option<String>,
}

impl SuiteOutcome {
    fn new(suite: &str) -> Self {
        SuiteOutcome {
            suite: suite.to_string(),
            checks: 0,
            violations: 0,
            first_violation: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(what());
            }
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.suite,
            self.checks,
            self.violations,
            self.first_violation.as_deref().unwrap_or("").replace(',', ";")
        )
    }
}

pub const CSV_HEADER: &str = "suite,checks,violations,firstViolation";

pub fn run(name: &str, seed: u64, samples: usize, budget: &Budget) -> Result<Vec<SuiteOutcome>> {
    if name == "all" {
        return SUITES.iter().map(|s| run_one(s, seed, samples, budget)).collect();
    }
    Ok(vec![run_one(name, seed, samples, budget)?])
}

fn run_one(name: &str, seed: u64, samples: usize, budget: &Budget) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new(name);
    match name {
        "sauer-grid" => {
            let mut r = rng(seed);
            for m in 1..=4 {
                for n in 2..=3 {
                    for k in 2..=n {
                        for _ in 0..samples {
                            let class = random_class(m, n, &mut r);
                            let rep = check_sauer(&class, k)?;
                            out.check(rep.holds, || format!("m={m} n={n} k={k}: {} > {}", rep.size, rep.bound));
                        }
                    }
                }
            }
        }
        "recursion-grid" => {
            for m in 1..=8 {
                for n in 2..=5 {
                    for k in 2..=n {
                        for d in 0..=m {
                            let ok = sauer_bound(m, n, k, d)? == recursion_bound(m, n, k, d)?;
                            out.check(ok, || format!("m={m} n={n} k={k} d={d}"));
                        }
                    }
                }
            }
        }
        "tightness-grid" => {
            for m in 1..=4 {
                for n in 2..=3 {
                    for d in 0..=m {
                        let class = tightness_class(m, n, n, d, budget)?;
                        let ok = BigUint::from(class.len()) == sauer_bound(m, n, n, d)? && dim_k(&class, n)? == d;
                        out.check(ok, || format!("m={m} n=k={n} d={d}"));
                    }
                }
            }
        }
        "greedy-grid" => {
            for m in 1..=4 {
                for n in 1..=3 {
                    for k in 1..=2 {
                        let menu = single_minded_menu(m, k)?;
                        let mut profiles = Vec::new();
                        for_each_tuple(menu.len(), n, |t| profiles.push(t.iter().map(|&i| menu[i].clone()).collect::<Vec<_>>()));
                        for vals in profiles {
                            let inst = AuctionInstance::new(m, 1, vals)?;
                            let opt = opt_welfare(&inst, budget)?;
                            let got = greedy_on_instance(&inst, k)?.welfare;
                            let bound = int(2 * k as i64) * &got;
                            out.check(opt <= bound, || format!("m={m} n={n} k={k}: opt {opt} vs greedy {got}"));
                        }
                    }
                }
            }
        }
        "trivial-ratio" => {
            for m in 1..=3 {
                for n in 1..=3 {
                    let bank = trivial_bank(m, n)?;
                    let insts = disjoint_singleton_profiles(m, n)
                        .into_iter()
                        .map(|v| AuctionInstance::new(m, 1, v))
                        .collect::<Result<Vec<_>>>()?;
                    let rep = measure_ratio(
                        insts,
                        |inst| Ok(mir_allocate(&bank, inst)?.welfare(&inst.tables()?)),
                        budget,
                        false,
                    )?;
                    let want = Ratio::Finite(int(m.min(n) as i64));
                    out.check(rep.worst.as_ref() == Some(&want), || {
                        format!("m={m} n={n}: worst {:?}", rep.worst.as_ref().map(Ratio::to_string))
                    });
                }
            }
        }
        "intersection-family" => {
            for s in 0..samples.min(10) as u64 {
                let ok = match intersection_family(32, 2, 54, seed.wrapping_add(s), 100) {
                    Ok(_) => true,
                    Err(Error::Construction { .. }) => false,
                    Err(e) => return Err(e),
                };
                out.check(ok, || format!("seed {}", seed.wrapping_add(s)));
            }
        }
        "truthfulness" => {
            for m in 1..=2 {
                let bank = trivial_bank(m, 2)?;
                let devs = deviation_grid(m, 20, seed);
                for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                    let vals = [a, b].map(|x| devs[x % devs.len()].clone()).to_vec();
                    let inst = AuctionInstance::new(m, 1, vals)?;
                    for i in 0..2 {
                        let probe = truthfulness_probe(&bank, &inst, i, &devs, PaymentRule::Clarke)?;
                        out.check(probe.truthful, || format!("m={m} bidder {i}: deviation {:?}", probe.violation));
                    }
                }
            }
        }
        other => {
            return Err(Error::Input(format!(
                "unknown suite `{other}`; known: all, {}",
                SUITES.join(", ")
            )))
        }
    }
    Ok(out)
}
