//! Small integer helpers shared by the partition search, the predictor and
//! the proposition oracle.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
///
/// Returns `None` when `gcd(a, m) != 1`. For `m == 1` the inverse is `0`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 0 {
        return None;
    }
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (i128::from(a % m), i128::from(m));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(i128::from(m)) as u64)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

/// Canonical factorization as `(prime, exponent)` pairs in ascending prime order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        push(d, &mut n);
        push(d + 2, &mut n);
        d += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn distinct_prime_factors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Product of the distinct prime factors of `n` (`radical(1) == 1`).
pub fn radical(n: u64) -> u64 {
    distinct_prime_factors(n).into_iter().product()
}

/// Exact division by a fixed divisor using a multiplicative inverse modulo 2^64.
///
/// Only valid when the dividend is known to be a multiple of the divisor,
/// which is always the case for `(n - m1*p) / m2` once `p` lies in the right
/// residue class.
#[derive(Debug, Clone, Copy)]
pub struct ExactDivisor {
    shift: u32,
    inverse: u64,
}

impl ExactDivisor {
    pub fn new(d: u64) -> Self {
        assert!(d > 0, "divisor must be positive");
        let shift = d.trailing_zeros();
        let odd = d >> shift;
        // Newton iteration: each step doubles the number of correct low bits.
        let mut inv = odd;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(odd.wrapping_mul(inv)));
        }
        debug_assert_eq!(odd.wrapping_mul(inv), 1);
        ExactDivisor {
            shift,
            inverse: inv,
        }
    }

    #[inline(always)]
    pub fn divide(&self, x: u64) -> u64 {
        (x >> self.shift).wrapping_mul(self.inverse)
    }
}
