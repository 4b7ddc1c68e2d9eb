//! Instance generators named on the command line as `kind:key=value,...`.

use std::collections::BTreeMap;

use kshatter::fixtures::{
    disjoint_singleton_profiles, for_each_tuple, random_k_local, random_subadditive, random_xos, rng,
    single_minded_menu,
};
use kshatter::mechanisms::AuctionInstance;
use kshatter::valuations::Valuation;
use kshatter::{Bundle, Error, Result};

pub const KINDS: &str = "disjoint-singleton, single-minded, zero-one-additive, k-local, subadditive, xos";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub kind: String,
    params: BTreeMap<String, usize>,
}

impl GeneratorSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params = BTreeMap::new();
        for kv in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("generator parameter `{kv}` is not key=value")))?;
            let v: usize = v
                .parse()
                .map_err(|_| Error::Input(format!("generator parameter {k} = `{v}` is not a nonnegative integer")))?;
            params.insert(k.to_string(), v);
        }
        Ok(GeneratorSpec {
            kind: kind.to_string(),
            params,
        })
    }

    fn get(&self, key: &str) -> Result<usize> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::Input(format!("generator {} needs parameter {key}", self.kind)))
    }

    fn get_or(&self, key: &str, default: usize) -> usize {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(Error::Input(format!("generator {} does not take parameter {k}", self.kind))),
            None => Ok(()),
        }
    }

    /// All instances in generation order; seeded kinds draw from `seed`.
    pub fn instances(&self, seed: u64) -> Result<Vec<AuctionInstance>> {
        let profiles: Vec<Vec<Valuation>> = match self.kind.as_str() {
            "disjoint-singleton" => {
                self.allow(&["m", "n", "d"])?;
                disjoint_singleton_profiles(self.get("m")?, self.get("n")?)
            }
            "single-minded" => {
                self.allow(&["m", "n", "k", "d"])?;
                let (m, n) = (self.get("m")?, self.get("n")?);
                let menu = single_minded_menu(m, self.get_or("k", m))?;
                tuples(&menu, n)
            }
            "zero-one-additive" => {
                self.allow(&["m", "n", "d"])?;
                let (m, n) = (self.get("m")?, self.get("n")?);
                let menu = (0..1u64 << m.min(16))
                    .map(|b| Valuation::zero_one_additive(m, Bundle::from_bits(b)))
                    .collect::<Result<Vec<_>>>()?;
                tuples(&menu, n)
            }
            "k-local" | "subadditive" | "xos" => {
                self.allow(&["m", "n", "k", "count", "d"])?;
                let (m, n, count) = (self.get("m")?, self.get("n")?, self.get("count")?);
                let mut r = rng(seed);
                let k = self.get_or("k", m);
                (0..count)
                    .map(|_| {
                        (0..n)
                            .map(|_| match self.kind.as_str() {
                                "k-local" => random_k_local(m, k, &mut r),
                                "subadditive" => random_subadditive(m, &mut r),
                                _ => random_xos(m, &mut r),
                            })
                            .collect()
                    })
                    .collect()
            }
            other => return Err(Error::Input(format!("unknown generator `{other}`; known: {KINDS}"))),
        };
        let d = self.get_or("d", 1);
        profiles
            .into_iter()
            .map(|vals| {
                let m = vals[0].items();
                AuctionInstance::new(m, d, vals)
            })
            .collect()
    }
}

fn tuples(menu: &[Valuation], n: usize) -> Vec<Vec<Valuation>> {
    let mut out = Vec::new();
    for_each_tuple(menu.len(), n, |t| out.push(t.iter().map(|&i| menu[i].clone()).collect()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kind_and_params() {
        let g = GeneratorSpec::parse("single-minded:m=3,n=2,k=2").unwrap();
        assert_eq!(g.kind, "single-minded");
        assert_eq!(g.instances(0).unwrap().len(), 36);
        assert!(GeneratorSpec::parse("xos:m=three").is_err());
        assert!(GeneratorSpec::parse("bogus:m=1").unwrap().instances(0).is_err());
        assert!(GeneratorSpec::parse("xos:m=2,n=2,count=1,z=3").unwrap().instances(0).is_err());
    }

    #[test]
    fn seeded_kinds_repeat() {
        let g = GeneratorSpec::parse("k-local:m=4,n=2,k=2,count=5").unwrap();
        assert_eq!(g.instances(9).unwrap(), g.instances(9).unwrap());
    }
}
