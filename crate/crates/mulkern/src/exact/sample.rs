use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Rat;
use crate::error::{Error, Result};

pub type Assignment = BTreeMap<String, Rat>;

pub const MAX_DRAWS: usize = 1000;

/// Seeded stream of rationals p/q with 1 ≤ p, q ≤ bound.
pub struct Sampler {
    rng: ChaCha8Rng,
    bound: u64,
}

impl Sampler {
    pub fn new(seed: u64, bound: u64) -> Result<Self> {
        if bound < 2 {
            return Err(Error::Invalid(format!("sampling bound {bound} < 2")));
        }
        Ok(Sampler { rng: ChaCha8Rng::seed_from_u64(seed), bound })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Number of distinct draws p/q before reduction.
    pub fn space_size(&self) -> u64 {
        self.bound * self.bound
    }

    pub fn rat(&mut self) -> Rat {
        let p = self.rng.gen_range(1..=self.bound) as i64;
        let q = self.rng.gen_range(1..=self.bound) as i64;
        Rat::new(p, q)
    }

    /// Random sign applied to a positive draw.
    pub fn signed_rat(&mut self) -> Rat {
        let r = self.rat();
        if self.rng.gen_bool(0.5) {
            -r
        } else {
            r
        }
    }

    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    /// Draws whole assignments until `reject` accepts one.
    pub fn point(&mut self, vars: &[&str], reject: impl Fn(&Assignment) -> bool) -> Result<Assignment> {
        for _ in 0..MAX_DRAWS {
            let a: Assignment = vars.iter().map(|v| (v.to_string(), self.rat())).collect();
            if !reject(&a) {
                return Ok(a);
            }
        }
        Err(Error::SamplingExhausted(MAX_DRAWS))
    }

    /// Retries an arbitrary fallible construction.
    pub fn retry<T>(&mut self, mut f: impl FnMut(&mut Sampler) -> Option<T>) -> Result<T> {
        for _ in 0..MAX_DRAWS {
            if let Some(t) = f(self) {
                return Ok(t);
            }
        }
        Err(Error::SamplingExhausted(MAX_DRAWS))
    }
}

/// One seeded assignment avoiding every value for which `reject` holds.
pub fn rand_rat_point(vars: &[&str], bound: u64, seed: u64, reject: impl Fn(&Assignment) -> bool) -> Result<Assignment> {
    Sampler::new(seed, bound)?.point(vars, reject)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn range_contract() {
        let a = rand_rat_point(&["x"], 10, 1, |_| false).unwrap();
        let x = &a["x"];
        assert!(*x.numer() >= BigInt::from(1) && *x.numer() <= BigInt::from(10));
        assert!(*x.denom() >= BigInt::from(1) && *x.denom() <= BigInt::from(10));
    }

    #[test]
    fn deterministic_from_seed() {
        let a = rand_rat_point(&["x", "y", "z"], 50, 7, |_| false).unwrap();
        let b = rand_rat_point(&["x", "y", "z"], 50, 7, |_| false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forbidden_values_avoided() {
        for seed in 0..50 {
            let a = rand_rat_point(&["x"], 2, seed, |a| a["x"].is_one()).unwrap();
            assert!(!a["x"].is_one());
        }
        assert!(matches!(rand_rat_point(&["x"], 2, 0, |_| true), Err(Error::SamplingExhausted(1000))));
        assert!(Sampler::new(0, 1).is_err());
    }
}
