//! Prime generation and membership, plus residue-class prime cursors.
//!
//! [`PrimeStore`] answers `is_prime` either from an odd-only bitset sieved up
//! to a fixed limit or, when that bitset would not fit the memory budget,
//! from a deterministic Miller–Rabin test. The store is immutable once built
//! and can be shared freely between worker threads.

mod cursor;
mod miller_rabin;
mod sieve;

pub use cursor::{primes_in_class_ascending, primes_in_class_descending, Direction, ResidueClassCursor};
pub use miller_rabin::is_prime_u64;
pub use sieve::{
    primes_up_to, sieve_range, sieve_range_with, RangeBitmap, SieveConfig, DEFAULT_MEMORY_BUDGET,
    DEFAULT_SEGMENT_SIZE,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backing {
    BitsetSieve,
    DeterministicTest,
}

#[derive(Debug, Clone)]
enum Repr {
    Bitset(Vec<u64>),
    MillerRabin,
}

#[derive(Debug, Clone)]
pub struct PrimeStore {
    limit: u64,
    segment_size: u64,
    repr: Repr,
}

impl PrimeStore {
    /// Bytes the bitset backing needs for `limit`.
    pub fn bitset_bytes(limit: u64) -> u64 {
        (limit / 2 + 1).div_ceil(64) * 8
    }

    /// Picks the bitset backing when it fits `config.memory_budget`, the
    /// deterministic test otherwise.
    pub fn new(limit: u64, config: &SieveConfig) -> Result<Self> {
        let backing = if Self::bitset_bytes(limit) <= config.memory_budget {
            Backing::BitsetSieve
        } else {
            Backing::DeterministicTest
        };
        Self::with_backing(limit, backing, config)
    }

    pub fn with_backing(limit: u64, backing: Backing, config: &SieveConfig) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Config(format!("prime store limit must be at least 2, got {limit}")));
        }
        let repr = match backing {
            Backing::BitsetSieve => {
                let needed = Self::bitset_bytes(limit);
                if needed > config.memory_budget {
                    return Err(Error::Resource {
                        what: "prime bitset",
                        needed,
                        budget: config.memory_budget,
                    });
                }
                Repr::Bitset(sieve::odd_bitset(limit, config.segment_size))
            }
            Backing::DeterministicTest => Repr::MillerRabin,
        };
        Ok(PrimeStore {
            limit,
            segment_size: config.segment_size,
            repr,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn segment_size(&self) -> u64 {
        self.segment_size
    }

    pub fn backing(&self) -> Backing {
        match self.repr {
            Repr::Bitset(_) => Backing::BitsetSieve,
            Repr::MillerRabin => Backing::DeterministicTest,
        }
    }

    /// Largest value this store can classify.
    pub fn max_supported(&self) -> u64 {
        match self.repr {
            Repr::Bitset(_) => self.limit,
            Repr::MillerRabin => u64::MAX,
        }
    }

    pub fn is_prime(&self, v: u64) -> Result<bool> {
        if v > self.max_supported() {
            return Err(Error::Range {
                value: v,
                what: "prime store",
            });
        }
        Ok(self.is_prime_unchecked(v))
    }

    /// Primality bitmap of `[lo, hi]` (one bit per value), read out of the
    /// bitset when there is one and sieved directly otherwise.
    pub fn primality_window(&self, lo: u64, hi: u64) -> Result<RangeBitmap> {
        if lo > hi {
            return Err(Error::Contract(format!("window [{lo}, {hi}] is empty")));
        }
        if hi > self.max_supported() {
            return Err(Error::Range {
                value: hi,
                what: "primality window",
            });
        }
        match &self.repr {
            Repr::Bitset(words) if lo.is_multiple_of(128) => Ok(sieve::spread_odd_bits(words, lo, hi)),
            _ => {
                let cfg = SieveConfig {
                    segment_size: self.segment_size,
                    memory_budget: u64::MAX,
                };
                sieve_range_with(lo, hi, &cfg)
            }
        }
    }

    /// Primality of `v`; the caller guarantees `v <= max_supported()`.
    #[inline(always)]
    pub(crate) fn is_prime_unchecked(&self, v: u64) -> bool {
        match &self.repr {
            Repr::Bitset(words) => {
                if v & 1 == 0 {
                    return v == 2;
                }
                let i = v >> 1;
                debug_assert!(v <= self.limit);
                words[(i >> 6) as usize] >> (i & 63) & 1 == 1
            }
            Repr::MillerRabin => is_prime_u64(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn small_store(limit: u64, backing: Backing) -> PrimeStore {
        PrimeStore::with_backing(limit, backing, &SieveConfig::default()).unwrap()
    }

    #[test]
    fn exhaustive_against_trial_division() {
        let limit = 1_000_000;
        let store = small_store(limit, Backing::BitsetSieve);
        let reference = sieve_range(0, limit).unwrap();
        let mut trial = vec![true; limit as usize + 1];
        trial[0] = false;
        trial[1] = false;
        // trial division, vectorised as a wheel of divisors up to sqrt(v)
        for v in 2..=limit as usize {
            let mut d = 2;
            while d * d <= v {
                if v % d == 0 {
                    trial[v] = false;
                    break;
                }
                d += 1;
            }
        }
        for v in 0..=limit {
            assert_eq!(store.is_prime(v).unwrap(), trial[v as usize], "{v}");
            assert_eq!(reference.contains(v), trial[v as usize], "{v}");
        }
    }

    #[test]
    fn backings_agree_on_random_values() {
        let limit = 50_000_000;
        let bits = small_store(limit, Backing::BitsetSieve);
        let mr = small_store(limit, Backing::DeterministicTest);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..10_000 {
            let v = rng.gen_range(2..=limit);
            assert_eq!(bits.is_prime(v).unwrap(), mr.is_prime(v).unwrap(), "{v}");
        }
    }

    #[test]
    fn range_errors() {
        let store = small_store(100, Backing::BitsetSieve);
        assert!(store.is_prime(100).is_ok());
        assert!(matches!(store.is_prime(101), Err(Error::Range { .. })));
        let mr = small_store(100, Backing::DeterministicTest);
        assert!(mr.is_prime(1_000_000_007).unwrap());
        assert!(!mr.is_prime(1).unwrap());
        assert!(mr.is_prime(2).unwrap());
    }

    #[test]
    fn budget_selects_backing() {
        let tight = SieveConfig {
            segment_size: DEFAULT_SEGMENT_SIZE,
            memory_budget: 1000,
        };
        assert_eq!(PrimeStore::new(1_000_000, &tight).unwrap().backing(), Backing::DeterministicTest);
        assert_eq!(
            PrimeStore::new(1_000_000, &SieveConfig::default()).unwrap().backing(),
            Backing::BitsetSieve
        );
        assert!(PrimeStore::with_backing(1_000_000, Backing::BitsetSieve, &tight).is_err());
        assert!(PrimeStore::new(1, &SieveConfig::default()).is_err());
    }
}
