//! Residue-class characterisation of `n = m1·p + m2·q`.
//!
//! For fixed `p` and `q` the equation holds exactly when one of two
//! conjunctions of residue conditions holds: conditions (a)–(d) when `q`
//! divides neither coefficient, (e)–(h) when `q | m2`. Conditions are
//! evaluated by plain modular arithmetic against explicitly parametrised
//! residue classes, with no reference to `n - m1·p` itself.

use rayon::prelude::*;

use crate::arith::{factorize, gcd, mod_inverse};
use crate::error::{Error, Result};
use crate::partitions::{is_admissible, CoeffPair};
use crate::primes::{is_prime_u64, primes_up_to};

/// Largest `n_max` accepted by [`verify_equivalence`].
pub const VERIFY_MAX_N: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    Case1,
    Case2,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub case_tag: CaseTag,
    /// Keyed `a..d` when `q ∤ m2`, `e..h` when `q | m2`.
    pub satisfied: Vec<(char, bool)>,
    pub equation_holds: bool,
}

impl ConditionReport {
    pub fn condition(&self, key: char) -> Option<bool> {
        self.satisfied.iter().find(|(k, _)| *k == key).map(|&(_, v)| v)
    }
}

/// `{ base + j·step (mod modulus) : 1 <= j <= count }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueClasses {
    pub modulus: u64,
    pub base: u64,
    pub step: u64,
    pub count: u64,
}

impl ResidueClasses {
    pub fn representatives(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.count).map(move |j| ((self.base as u128 + j as u128 * self.step as u128) % self.modulus as u128) as u64)
    }

    /// Membership by solving for `j`; requires `step | modulus`.
    pub fn contains(&self, x: u64) -> bool {
        let offset = (x % self.modulus + self.modulus - self.base % self.modulus) % self.modulus;
        offset.is_multiple_of(self.step) && {
            let j = offset / self.step;
            // j = 0 is the excluded class; the rest of 1..modulus/step wraps to itself
            (1..=self.count).contains(&j)
        }
    }
}

/// `[n]·[m1]⁻¹ + j·[step]` modulo `modulus`, `1 <= j <= count`; `None`
/// when `m1` is not invertible.
fn classes(n: u64, m1: u64, modulus: u64, step: u64, count: u64) -> Option<ResidueClasses> {
    let inv = mod_inverse(m1 % modulus, modulus)?;
    let base = ((n % modulus) as u128 * inv as u128 % modulus as u128) as u64;
    Some(ResidueClasses {
        modulus,
        base,
        step,
        count,
    })
}

/// Override used to confirm that verification detects a broken condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Negate condition (a).
    FlipA,
}

/// Per-`n` data shared by every `(p, q)` tuple.
struct Instance {
    m1: u64,
    m2: u64,
    n: u64,
    /// `(r_i, r_i^α_i)` for the prime powers of `m2`.
    m2_powers: Vec<(u64, u64)>,
    /// `(s, [n]·[m1]⁻¹ mod s)` for primes `s` in the (d)/(h) range coprime to `m1·m2`.
    forbidden: Vec<(u64, u64)>,
    fault: Fault,
}

impl Instance {
    fn new(pair: CoeffPair, n: u64, k: u64, inclusive: bool, fault: Fault) -> Self {
        let (m1, m2) = (pair.m1(), pair.m2());
        let m2_powers = factorize(m2).into_iter().map(|(r, a)| (r, r.pow(a))).collect();
        let top = if inclusive { k } else { k.saturating_sub(1) };
        let forbidden = primes_up_to(top)
            .into_iter()
            .filter(|&s| m1 % s != 0 && m2 % s != 0)
            .map(|s| (s, classes(n, m1, s, 1, 0).map(|c| c.base).unwrap_or(0)))
            .collect();
        Instance {
            m1,
            m2,
            n,
            m2_powers,
            forbidden,
            fault,
        }
    }

    fn a(&self, q: u64) -> bool {
        let v = !self.m2.is_multiple_of(q) && !self.m1.is_multiple_of(q);
        if self.fault == Fault::FlipA {
            !v
        } else {
            v
        }
    }

    /// (b) and, with `skip = Some(q)`, (f).
    fn b(&self, p: u64, skip: Option<u64>) -> bool {
        self.m2_powers.iter().filter(|&&(r, _)| Some(r) != skip).all(|&(r, ra)| {
            classes(self.n, self.m1, ra * r, ra, r - 1).is_some_and(|c| c.contains(p))
        })
    }

    fn c(&self, p: u64, q: u64) -> bool {
        classes(self.n, self.m1, q * q, q, q - 1).is_some_and(|c| c.contains(p))
    }

    /// (d) when `exclude = Some(q)`, (h) when `None`.
    fn d(&self, p: u64, exclude: Option<u64>) -> bool {
        self.forbidden.iter().all(|&(s, bad)| Some(s) == exclude || p % s != bad)
    }

    fn e(&self, q: u64) -> bool {
        self.m2.is_multiple_of(q) && !self.m1.is_multiple_of(q)
    }

    fn g(&self, p: u64, q: u64) -> bool {
        let qa = self.m2_powers.iter().find(|&&(r, _)| r == q).map(|&(_, ra)| ra);
        qa.and_then(|qa| classes(self.n, self.m1, qa * q * q, qa * q, q - 1))
            .is_some_and(|c| c.contains(p))
    }

    fn report(&self, p: u64, q: u64) -> ConditionReport {
        let equation_holds = self.m1 as u128 * p as u128 + self.m2 as u128 * q as u128 == self.n as u128;
        let (satisfied, case) = if self.m2.is_multiple_of(q) {
            let v = vec![('e', self.e(q)), ('f', self.b(p, Some(q))), ('g', self.g(p, q)), ('h', self.d(p, None))];
            (v, CaseTag::Case2)
        } else {
            let v = vec![('a', self.a(q)), ('b', self.b(p, None)), ('c', self.c(p, q)), ('d', self.d(p, Some(q)))];
            (v, CaseTag::Case1)
        };
        let case_tag = if satisfied.iter().all(|&(_, b)| b) { case } else { CaseTag::Neither };
        ConditionReport {
            case_tag,
            satisfied,
            equation_holds,
        }
    }

    /// Short-circuit form of "Case 1 or Case 2 holds".
    fn either_case(&self, p: u64, q: u64) -> bool {
        if self.m2.is_multiple_of(q) {
            self.e(q) && self.b(p, Some(q)) && self.g(p, q) && self.d(p, None)
        } else {
            self.a(q) && self.b(p, None) && self.c(p, q) && self.d(p, Some(q))
        }
    }
}

fn k_default(pair: CoeffPair, n: u64) -> u64 {
    n.div_ceil(pair.m2())
}

/// Evaluates every condition of the case selected by `q` literally.
pub fn check_conditions(m1: u64, m2: u64, n: u64, p: u64, q: u64, k: u64) -> Result<ConditionReport> {
    let pair = CoeffPair::new(m1, m2).map_err(|_| Error::Contract(format!("{m1} and {m2} are not coprime positive integers")))?;
    if gcd(n, m1) != 1 || gcd(n, m2) != 1 {
        return Err(Error::Contract(format!("n = {n} shares a factor with {m1}·{m2}")));
    }
    if !is_admissible(pair, n) {
        return Err(Error::Contract(format!("n = {n} is not admissible for pair {pair}")));
    }
    if !is_prime_u64(p) || !is_prime_u64(q) {
        return Err(Error::Contract(format!("p = {p} and q = {q} must both be prime")));
    }
    if m1 as u128 * p as u128 >= n as u128 {
        return Err(Error::Contract(format!("p = {p} must be below n/m1")));
    }
    if k < k_default(pair, n) {
        return Err(Error::Contract(format!("K = {k} is below n/m2")));
    }
    Ok(Instance::new(pair, n, k, false, Fault::None).report(p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// `K = k_multiplier · ceil(n/m2)`.
    pub k_multiplier: u64,
    /// Range primes `s <= K` instead of `s < K` in (d)/(h).
    pub inclusive_bound: bool,
    pub fault: Fault,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            k_multiplier: 1,
            inclusive_bound: false,
            fault: Fault::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub n: u64,
    pub p: u64,
    pub q: u64,
    pub equation_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub pair: CoeffPair,
    pub n_max: u64,
    pub tuples_checked: u64,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the equivalence for every admissible `n <= n_max`, every prime
/// `p < n/m1` and every prime `q < n/m2`.
pub fn verify_equivalence(pair: CoeffPair, n_max: u64, opts: &VerifyOptions) -> Result<VerifyReport> {
    if n_max > VERIFY_MAX_N {
        return Err(Error::Range {
            value: n_max,
            what: "exhaustive verification bound",
        });
    }
    if opts.k_multiplier == 0 {
        return Err(Error::Config("K multiplier must be positive".into()));
    }
    let (m1, m2) = (pair.m1(), pair.m2());
    let primes = primes_up_to(n_max);
    let per_n: Vec<(u64, Vec<Violation>)> = (1..=n_max)
        .into_par_iter()
        .filter(|&n| is_admissible(pair, n))
        .map(|n| {
            let k = opts.k_multiplier * k_default(pair, n);
            let inst = Instance::new(pair, n, k, opts.inclusive_bound, opts.fault);
            let ps = primes.iter().copied().take_while(|&p| m1 * p < n);
            let mut checked = 0u64;
            let mut bad = Vec::new();
            for p in ps {
                for q in primes.iter().copied().take_while(|&q| m2 * q < n) {
                    checked += 1;
                    let eq = m1 * p + m2 * q == n;
                    if eq != inst.either_case(p, q) {
                        bad.push(Violation {
                            n,
                            p,
                            q,
                            equation_holds: eq,
                        });
                    }
                }
            }
            (checked, bad)
        })
        .collect();
    let tuples_checked = per_n.iter().map(|(c, _)| c).sum();
    let violations = per_n.into_iter().flat_map(|(_, v)| v).collect();
    Ok(VerifyReport {
        pair,
        n_max,
        tuples_checked,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: u64, b: u64) -> CoeffPair {
        CoeffPair::new(a, b).unwrap()
    }

    #[test]
    fn worked_tuples() {
        let r = check_conditions(2, 3, 25, 2, 7, 9).unwrap();
        assert!(r.equation_holds);
        assert_eq!(r.case_tag, CaseTag::Case1);
        assert_eq!(r.satisfied.iter().map(|s| s.0).collect::<String>(), "abcd");

        let r = check_conditions(2, 3, 25, 5, 5, 9).unwrap();
        assert!(r.equation_holds);
        assert_eq!(r.case_tag, CaseTag::Case1);

        let r = check_conditions(2, 3, 31, 11, 3, 11).unwrap();
        assert!(r.equation_holds);
        assert_eq!(r.case_tag, CaseTag::Case2);

        let r = check_conditions(1, 3, 16, 7, 3, 6).unwrap();
        assert!(r.equation_holds);
        assert_eq!(r.case_tag, CaseTag::Case2);
        assert_eq!(r.satisfied.iter().map(|s| s.0).collect::<String>(), "efgh");
    }

    #[test]
    fn no_partition_for_seven() {
        for q in [2, 3] {
            let r = check_conditions(1, 2, 7, 5, q, 4).unwrap();
            assert!(!r.equation_holds);
            assert_eq!(r.case_tag, CaseTag::Neither);
        }
    }

    #[test]
    fn contract_violations() {
        assert!(check_conditions(2, 4, 25, 2, 7, 9).is_err());
        assert!(check_conditions(2, 3, 26, 2, 7, 9).is_err());
        assert!(check_conditions(2, 3, 25, 4, 7, 9).is_err());
        assert!(check_conditions(2, 3, 25, 13, 7, 9).is_err());
        assert!(check_conditions(2, 3, 25, 2, 7, 8).is_err());
    }

    #[test]
    fn explicit_representatives_match_membership() {
        for modulus_base in [2u64, 3, 5, 7] {
            for extra in 0..3u32 {
                let step = modulus_base.pow(extra + 1);
                let modulus = step * modulus_base;
                for base in 0..modulus {
                    let c = ResidueClasses {
                        modulus,
                        base,
                        step,
                        count: modulus_base - 1,
                    };
                    let reps: Vec<u64> = c.representatives().collect();
                    for x in 0..2 * modulus {
                        assert_eq!(c.contains(x), reps.contains(&(x % modulus)));
                    }
                }
            }
        }
    }

    #[test]
    fn small_equivalences() {
        let o = VerifyOptions::default();
        for (a, b, n) in [(1, 2, 500), (3, 5, 500), (1, 1, 200), (2, 9, 400), (9, 8, 400)] {
            let r = verify_equivalence(pair(a, b), n, &o).unwrap();
            assert!(r.is_clean(), "{a}:{b} {:?}", &r.violations[..r.violations.len().min(3)]);
            assert!(r.tuples_checked > 0);
        }
    }

    #[test]
    fn k_and_boundary_insensitive() {
        let variants = [
            VerifyOptions { k_multiplier: 2, ..Default::default() },
            VerifyOptions { inclusive_bound: true, ..Default::default() },
        ];
        for v in variants {
            for (a, b) in [(1, 2), (4, 3), (5, 6)] {
                assert!(verify_equivalence(pair(a, b), 300, &v).unwrap().is_clean());
            }
        }
    }

    #[test]
    fn fault_is_detected() {
        let o = VerifyOptions { fault: Fault::FlipA, ..Default::default() };
        assert!(!verify_equivalence(pair(1, 2), 100, &o).unwrap().is_clean());
        assert!(verify_equivalence(pair(1, 2), VERIFY_MAX_N + 1, &VerifyOptions::default()).is_err());
    }

    #[test]
    fn degenerate_family_included() {
        // n = (m1 + m2)·q has the representation p = q
        let r = check_conditions(2, 3, 35, 7, 7, 12).unwrap();
        assert!(r.equation_holds);
        assert_eq!(r.case_tag, CaseTag::Case1);
    }
}
