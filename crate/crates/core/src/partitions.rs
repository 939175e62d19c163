//! Admissibility and p-minimal partition search for `n = m1·p + m2·q`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, mod_inverse, ExactDivisor};
use crate::error::{Error, Result};
use crate::primes::{PrimeStore, ResidueClassCursor};

/// Largest `n` the unfiltered oracle accepts.
pub const BRUTEFORCE_MAX_N: u64 = 10_000_000;

/// An ordered pair of coprime positive coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u64, u64)", into = "(u64, u64)")]
pub struct CoeffPair {
    m1: u64,
    m2: u64,
}

impl CoeffPair {
    pub fn new(m1: u64, m2: u64) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::Input(format!("coefficients must be positive, got ({m1}, {m2})")));
        }
        if gcd(m1, m2) != 1 {
            return Err(Error::Input(format!("coefficients ({m1}, {m2}) are not coprime")));
        }
        Ok(CoeffPair { m1, m2 })
    }

    pub fn m1(self) -> u64 {
        self.m1
    }

    pub fn m2(self) -> u64 {
        self.m2
    }

    pub fn swapped(self) -> Self {
        CoeffPair {
            m1: self.m2,
            m2: self.m1,
        }
    }

    /// All ordered coprime pairs with `1 <= m1, m2 <= bound` and `m1 != m2`,
    /// lexicographically ordered; `(1, 1)` is added when `include_one_one`.
    pub fn all_up_to(bound: u64, include_one_one: bool) -> Vec<Self> {
        let mut out = Vec::new();
        for m1 in 1..=bound {
            for m2 in 1..=bound {
                if (m1 != m2 || (include_one_one && m1 == 1)) && gcd(m1, m2) == 1 {
                    out.push(CoeffPair { m1, m2 });
                }
            }
        }
        out
    }
}

impl TryFrom<(u64, u64)> for CoeffPair {
    type Error = Error;

    fn try_from((m1, m2): (u64, u64)) -> Result<Self> {
        CoeffPair::new(m1, m2)
    }
}

impl From<CoeffPair> for (u64, u64) {
    fn from(p: CoeffPair) -> Self {
        (p.m1, p.m2)
    }
}

impl fmt::Display for CoeffPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.m1, self.m2)
    }
}

impl FromStr for CoeffPair {
    type Err = Error;

    /// Accepts `m1:m2` or `m1,m2`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .or_else(|| s.split_once(','))
            .ok_or_else(|| Error::Input(format!("pair {s:?} is not of the form m1:m2")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Input(format!("pair {s:?} has a non-integer component")))
        };
        CoeffPair::new(parse(a)?, parse(b)?)
    }
}

/// The p-minimal partition of `n`, or the information that none exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Partition {
    Found { p_min: u64, q_at_pmin: u64 },
    NoPartition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionOutcome {
    pub n: u64,
    pub result: Partition,
}

impl PartitionOutcome {
    fn found(n: u64, p: u64, q: u64) -> Self {
        PartitionOutcome {
            n,
            result: Partition::Found { p_min: p, q_at_pmin: q },
        }
    }

    fn none(n: u64) -> Self {
        PartitionOutcome {
            n,
            result: Partition::NoPartition,
        }
    }

    pub fn p_min(&self) -> Option<u64> {
        match self.result {
            Partition::Found { p_min, .. } => Some(p_min),
            Partition::NoPartition => None,
        }
    }

    pub fn q_at_pmin(&self) -> Option<u64> {
        match self.result {
            Partition::Found { q_at_pmin, .. } => Some(q_at_pmin),
            Partition::NoPartition => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self.result, Partition::Found { .. })
    }
}

/// `gcd(n, m1) = gcd(n, m2) = 1` and `n ≡ m1 + m2 (mod 2)`.
pub fn is_admissible(pair: CoeffPair, n: u64) -> bool {
    n >= 1 && gcd(n, pair.m1) == 1 && gcd(n, pair.m2) == 1 && (n & 1) == ((pair.m1 + pair.m2) & 1)
}

fn require_admissible(pair: CoeffPair, n: u64) -> Result<()> {
    if is_admissible(pair, n) {
        Ok(())
    } else {
        Err(Error::Contract(format!("n = {n} is not admissible for pair {pair}")))
    }
}

fn require_store_covers(store: &PrimeStore, pair: CoeffPair, n: u64) -> Result<()> {
    let largest = n / pair.m1.min(pair.m2);
    if largest > store.max_supported() {
        return Err(Error::Range {
            value: largest,
            what: "partition component beyond prime store",
        });
    }
    Ok(())
}

/// Smallest `n` that can have a partition at all (`p = q = 2`).
fn smallest_partitionable(pair: CoeffPair) -> u64 {
    2 * (pair.m1 + pair.m2)
}

/// Ascending search over `p ≡ n·m1⁻¹ (mod m2)`; the first `p` whose
/// complement `(n - m1·p)/m2` is prime is the p-minimal partition.
pub fn find_p_minimal(store: &PrimeStore, pair: CoeffPair, n: u64) -> Result<PartitionOutcome> {
    require_admissible(pair, n)?;
    require_store_covers(store, pair, n)?;
    Ok(PairSearch::new(store, pair).search(n))
}

/// Descending search over `q ≡ n·m2⁻¹ (mod m1)` from `(n - 2·m1)/m2`; the
/// first hit is the q-maximal partition, which is the p-minimal one.
pub fn find_q_maximal_descending(store: &PrimeStore, pair: CoeffPair, n: u64) -> Result<PartitionOutcome> {
    require_admissible(pair, n)?;
    require_store_covers(store, pair, n)?;
    let (m1, m2) = (pair.m1, pair.m2);
    if n < smallest_partitionable(pair) {
        return Ok(PartitionOutcome::none(n));
    }
    let residue = if m1 == 1 {
        0
    } else {
        let inv = mod_inverse(m2 % m1, m1).expect("coprime coefficients");
        crate::arith::mul_mod(n % m1, inv, m1)
    };
    let top = (n - 2 * m1) / m2;
    let div = ExactDivisor::new(m1);
    for q in ResidueClassCursor::descending(store, m1, residue, top) {
        let p = div.divide(n - m2 * q);
        if store.is_prime_unchecked(p) {
            return Ok(PartitionOutcome::found(n, p, q));
        }
    }
    Ok(PartitionOutcome::none(n))
}

/// Unfiltered oracle: every prime `p <= (n - 2·m2)/m1` in order, with its own
/// trial-division primality test.
pub fn find_p_minimal_bruteforce(pair: CoeffPair, n: u64) -> Result<PartitionOutcome> {
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::Range {
            value: n,
            what: "brute-force partition oracle",
        });
    }
    require_admissible(pair, n)?;
    let (m1, m2) = (pair.m1, pair.m2);
    if n < smallest_partitionable(pair) {
        return Ok(PartitionOutcome::none(n));
    }
    let bound = (n - 2 * m2) / m1;
    for p in 2..=bound {
        if !trial_division(p) {
            continue;
        }
        let rest = n - m1 * p;
        if rest.is_multiple_of(m2) && trial_division(rest / m2) {
            return Ok(PartitionOutcome::found(n, p, rest / m2));
        }
    }
    Ok(PartitionOutcome::none(n))
}

fn trial_division(v: u64) -> bool {
    if v < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= v {
        if v.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Per-pair search state: `n·m1⁻¹ mod m2` cached by `n mod m2`, and an
/// exact divisor for `m2`. Reused by the sweep for every `n`.
#[derive(Debug, Clone)]
pub struct PairSearch<'a> {
    store: &'a PrimeStore,
    pair: CoeffPair,
    residue_of: Vec<u64>,
    div_m2: ExactDivisor,
}

impl<'a> PairSearch<'a> {
    pub fn new(store: &'a PrimeStore, pair: CoeffPair) -> Self {
        let m2 = pair.m2;
        let inv = mod_inverse(pair.m1 % m2, m2).expect("coprime coefficients");
        let residue_of = (0..m2).map(|c| crate::arith::mul_mod(c, inv, m2)).collect();
        PairSearch {
            store,
            pair,
            residue_of,
            div_m2: ExactDivisor::new(m2),
        }
    }

    pub fn pair(&self) -> CoeffPair {
        self.pair
    }

    /// Residue class mod `m2` that every usable `p` for `n` lies in.
    #[inline]
    pub fn residue_for(&self, n: u64) -> u64 {
        self.residue_of[(n % self.pair.m2) as usize]
    }

    /// p-minimal partition of an admissible `n` the store covers.
    #[inline]
    pub fn search(&self, n: u64) -> PartitionOutcome {
        self.search_from(n, 2)
    }

    /// As [`search`](Self::search), for a caller that has already ruled out
    /// every `p < p_start`.
    pub fn search_from(&self, n: u64, p_start: u64) -> PartitionOutcome {
        let (m1, m2) = (self.pair.m1, self.pair.m2);
        if n < smallest_partitionable(self.pair) {
            return PartitionOutcome::none(n);
        }
        let ceiling = n - 2 * m2;
        let r = self.residue_for(n);
        for p in ResidueClassCursor::ascending(self.store, m2, r, p_start.max(2)) {
            let used = m1.saturating_mul(p);
            if used > ceiling {
                break;
            }
            let q = self.div_m2.divide(n - used);
            if self.store.is_prime_unchecked(q) {
                debug_assert_eq!(m1 * p + m2 * q, n);
                return PartitionOutcome::found(n, p, q);
            }
        }
        PartitionOutcome::none(n)
    }
}
