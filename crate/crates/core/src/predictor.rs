//! Closed-form quantities attached to a coefficient pair: the rank predictor
//! `R`, its truncated diagnostic `R'(n)`, the Hardy–Littlewood partition
//! count estimate, Euler's totient and the speed comparator `g_L`.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};

use crate::arith::{distinct_prime_factors, factorize};
use crate::error::{Error, Result};
use crate::partitions::{is_admissible, CoeffPair};
use crate::primes::{PrimeStore, ResidueClassCursor};

/// Twin prime constant to 10 digits (0.66016 to 5).
pub const TWIN_PRIME_CONSTANT: f64 = 0.660_161_815_8;

/// Largest `n` accepted by [`compute_r_prime`].
pub const R_PRIME_MAX_N: u64 = 10_000_000;

pub type Rational = Ratio<BigUint>;

/// `m2 · Π (s-2)/(s-1)` over the distinct odd primes `s` dividing `m1·m2`.
pub fn compute_r(pair: CoeffPair) -> Rational {
    let mut odd: Vec<u64> = distinct_prime_factors(pair.m1());
    odd.extend(distinct_prime_factors(pair.m2()));
    odd.retain(|&s| s > 2);
    odd.into_iter().fold(Rational::from_integer(BigUint::from(pair.m2())), |acc, s| {
        acc * Rational::new(BigUint::from(s - 2), BigUint::from(s - 1))
    })
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    // numerator and denominator stay small for realistic pairs; fall back to
    // a scaled division otherwise
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            let scale = BigUint::from(10u32).pow(30);
            (r.numer() * &scale / r.denom()).to_f64().unwrap_or(f64::INFINITY) / 1e30
        }
    }
}

/// `(1/m2) · Π_{s<=n, s∤n·m1·m2} (s-2)/(s-1) · Σ_{q<=n, q∤n·m1} 1/(q-1)`,
/// accumulated over primes in ascending order.
pub fn compute_r_prime(pair: CoeffPair, n: u64, store: &PrimeStore) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("R'(n) needs n >= 3, got {n}")));
    }
    if n > R_PRIME_MAX_N {
        return Err(Error::Range {
            value: n,
            what: "R'(n) diagnostic",
        });
    }
    if n > store.max_supported() {
        return Err(Error::Range {
            value: n,
            what: "prime store for R'(n)",
        });
    }
    let (m1, m2) = (pair.m1(), pair.m2());
    let mut product = 1.0f64;
    let mut sum = 0.0f64;
    for s in ResidueClassCursor::ascending(store, 1, 0, 2).take_while(|&s| s <= n) {
        let divides_n_m1 = n.is_multiple_of(s) || m1 % s == 0;
        if !divides_n_m1 && m2 % s != 0 {
            product *= (s - 2) as f64 / (s - 1) as f64;
        }
        if !divides_n_m1 {
            sum += 1.0 / (s - 1) as f64;
        }
    }
    Ok(product * sum / m2 as f64)
}

/// `(2·C2/(m1·m2)) · n/(ln n)² · Π (p-1)/(p-2)` over the distinct odd primes
/// dividing `m1`, `m2` or `n`.
pub fn compute_n_estimate(pair: CoeffPair, n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("estimate needs n >= 3, got {n}")));
    }
    if !is_admissible(pair, n) {
        return Err(Error::Contract(format!("n = {n} is not admissible for pair {pair}")));
    }
    let mut odd: Vec<u64> = [pair.m1(), pair.m2(), n]
        .into_iter()
        .flat_map(distinct_prime_factors)
        .filter(|&p| p > 2)
        .collect();
    odd.sort_unstable();
    odd.dedup();
    let correction: f64 = odd.iter().map(|&p| (p - 1) as f64 / (p - 2) as f64).product();
    let ln = (n as f64).ln();
    Ok(2.0 * TWIN_PRIME_CONSTANT / (pair.m1() * pair.m2()) as f64 * n as f64 / (ln * ln) * correction)
}

/// Euler's totient by factorization.
pub fn euler_phi(m: u64) -> u64 {
    if m == 0 {
        return 0;
    }
    factorize(m).into_iter().fold(m, |acc, (p, _)| acc / p * (p - 1))
}

/// `avg / (φ(m2) · ln avg)`.
pub fn compute_g(pair: CoeffPair, avg_pmin: f64) -> Result<f64> {
    if !avg_pmin.is_finite() || avg_pmin <= 1.0 {
        return Err(Error::Domain(format!("g needs an average above 1, got {avg_pmin}")));
    }
    Ok(avg_pmin / (euler_phi(pair.m2()) as f64 * avg_pmin.ln()))
}

/// Predictor values for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorValues {
    pub pair: CoeffPair,
    pub r: Rational,
    pub r_float: f64,
    pub g: Option<f64>,
    pub r_prime_at_n: Option<(u64, f64)>,
}

impl PredictorValues {
    pub fn new(pair: CoeffPair) -> Self {
        let r = compute_r(pair);
        let r_float = rational_to_f64(&r);
        PredictorValues {
            pair,
            r,
            r_float,
            g: None,
            r_prime_at_n: None,
        }
    }
}

/// `R` as `numerator/denominator` (just the numerator when integral).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::gcd;
    use crate::primes::{Backing, SieveConfig};
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn pair(a: u64, b: u64) -> CoeffPair {
        CoeffPair::new(a, b).unwrap()
    }

    fn q(a: u32, b: u32) -> Rational {
        Ratio::new(BigUint::from(a), BigUint::from(b))
    }

    #[test]
    fn r_spot_values() {
        assert_eq!(compute_r(pair(1, 1)), q(1, 1));
        assert_eq!(compute_r(pair(2, 3)), q(3, 2));
        assert_eq!(compute_r(pair(3, 2)), q(1, 1));
        assert_eq!(compute_r(pair(12, 35)), q(175, 16));
        assert_eq!(compute_r(pair(2, 1)), compute_r(pair(4, 1)));
        assert_eq!(compute_r(pair(3, 1)), q(1, 2));
        assert_eq!(format_rational(&compute_r(pair(12, 35))), "175/16");
        assert_eq!(format_rational(&compute_r(pair(1, 1))), "1");
    }

    #[test]
    fn r_exact_ratio_law() {
        for p in CoeffPair::all_up_to(40, true) {
            let lhs = compute_r(p) * BigUint::from(p.m1());
            let rhs = compute_r(p.swapped()) * BigUint::from(p.m2());
            assert_eq!(lhs, rhs, "{p}");
            if p.m1() < p.m2() {
                assert!(compute_r(p.swapped()) < compute_r(p), "{p}");
            }
        }
    }

    #[test]
    fn adding_an_odd_prime_scales_r() {
        // m1 = 2 -> 2·s for odd primes s not dividing m2
        for m2 in [1u64, 7, 11, 25] {
            for s in [3u64, 5, 13, 17] {
                if gcd(s, m2) != 1 {
                    continue;
                }
                let base = compute_r(pair(2, m2));
                let grown = compute_r(pair(2 * s, m2));
                assert_eq!(grown, base * q((s - 2) as u32, (s - 1) as u32));
            }
        }
    }

    /// Independent evaluator: trial-division primes, plain loops.
    fn r_prime_oracle(m1: u64, m2: u64, n: u64) -> f64 {
        let is_p = |v: u64| v >= 2 && (2..v).take_while(|d| d * d <= v).all(|d| !v.is_multiple_of(d));
        let primes: Vec<u64> = (2..=n).filter(|&v| is_p(v)).collect();
        let mut prod = 1.0;
        for &s in &primes {
            if !(n * m1 * m2).is_multiple_of(s) {
                prod *= (s as f64 - 2.0) / (s as f64 - 1.0);
            }
        }
        let mut sum = 0.0;
        for &qq in &primes {
            if !(n * m1).is_multiple_of(qq) {
                sum += 1.0 / (qq as f64 - 1.0);
            }
        }
        prod * sum / m2 as f64
    }

    #[test]
    fn r_prime_examples() {
        let s = PrimeStore::with_backing(20_000, Backing::BitsetSieve, &SieveConfig::default()).unwrap();
        assert_eq!(compute_r_prime(pair(1, 1), 3, &s).unwrap(), 0.0);
        assert!((compute_r_prime(pair(1, 2), 9, &s).unwrap() - 85.0 / 192.0).abs() < 1e-15);
        assert!((compute_r_prime(pair(1, 1), 4, &s).unwrap() - 0.25).abs() < 1e-15);
        assert!(compute_r_prime(pair(1, 1), 2, &s).is_err());
        assert!(compute_r_prime(pair(1, 1), 30_000, &s).is_err());
        for (a, b) in [(1, 1), (1, 2), (3, 4), (7, 10), (12, 35)] {
            for n in [100u64, 997, 5_000, 10_000] {
                let fast = compute_r_prime(pair(a, b), n, &s).unwrap();
                let slow = r_prime_oracle(a, b, n);
                let scale = fast.abs().max(slow.abs()).max(1e-300);
                assert!((fast - slow).abs() / scale < 1e-12, "{a}:{b} n={n} {fast} {slow}");
            }
        }
    }

    #[test]
    fn n_estimate_examples() {
        let e = compute_n_estimate(pair(1, 1), 10).unwrap();
        let expect = 2.0 * TWIN_PRIME_CONSTANT * 10.0 / 10f64.ln().powi(2) * 4.0 / 3.0;
        assert!((e - expect).abs() < 1e-12);
        assert!((e - 3.320).abs() < 1e-3);
        let n = 1u64 << 20;
        let e = compute_n_estimate(pair(1, 1), n).unwrap();
        assert!((e - 2.0 * TWIN_PRIME_CONSTANT * n as f64 / (n as f64).ln().powi(2)).abs() < 1e-9);
        assert!(compute_n_estimate(pair(1, 2), 8).is_err());
        assert!(compute_n_estimate(pair(1, 1), 2).is_err());
    }

    #[test]
    fn totient_examples() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(euler_phi(97), 96);
        assert_eq!(euler_phi(40), 16);
        let brute = |m: u64| (1..=m).filter(|&k| gcd(k, m) == 1).count() as u64;
        for m in 1..500 {
            assert_eq!(euler_phi(m), brute(m));
        }
    }

    #[test]
    fn g_examples() {
        let g12 = compute_g(pair(1, 2), 80.839).unwrap();
        let g21 = compute_g(pair(2, 1), 32.80032).unwrap();
        assert!((g12 - 18.404).abs() < 5e-4, "{g12}");
        assert!((g21 - 9.397_19).abs() < 1e-5, "{g21}");
        assert!((compute_g(pair(5, 1), std::f64::consts::E).unwrap() - std::f64::consts::E).abs() < 1e-12);
        assert!(compute_g(pair(1, 2), 1.0).is_err());
        assert!(compute_g(pair(1, 2), f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn totient_multiplicative(a in 1u64..5_000, b in 1u64..5_000) {
            prop_assume!(gcd(a, b) == 1);
            prop_assert_eq!(euler_phi(a * b), euler_phi(a) * euler_phi(b));
        }

        #[test]
        fn r_depends_on_radical_of_m1(m1 in 1u64..200, k in 1u32..4, m2 in 1u64..200) {
            prop_assume!(gcd(m1, m2) == 1);
            let power = m1.pow(k);
            prop_assert_eq!(compute_r(pair(m1, m2)), compute_r(pair(power, m2)));
        }
    }
}
