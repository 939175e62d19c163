use super::PrimeStore;
use crate::arith::gcd;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

/// Walks the primes of one reduced residue class `r (mod m)` in either
/// direction.
///
/// Candidates advance in arithmetic progression (step `m`, or `2m` over the
/// odd members of the class when `m` is odd) and are filtered through the
/// store. The even prime 2 is handled explicitly: it is yielded first
/// (ascending) or last (descending) when `2 ≡ r (mod m)`.
#[derive(Debug, Clone)]
pub struct ResidueClassCursor<'a> {
    store: &'a PrimeStore,
    modulus: u64,
    residue: u64,
    direction: Direction,
    next: Option<u64>,
    step: u64,
    two_pending: bool,
}

fn validate(m: u64, r: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::Contract("modulus must be positive".into()));
    }
    if r >= m || (m > 1 && gcd(r, m) != 1) {
        return Err(Error::InvalidClass { modulus: m, residue: r });
    }
    Ok(())
}

/// Primes `p >= start` with `p ≡ r (mod m)`, ascending. With `m == 1` every
/// prime is yielded.
pub fn primes_in_class_ascending(store: &PrimeStore, m: u64, r: u64, start: u64) -> Result<ResidueClassCursor<'_>> {
    validate(m, r)?;
    if start < 2 {
        return Err(Error::Contract(format!("cursor start must be at least 2, got {start}")));
    }
    Ok(ResidueClassCursor::ascending(store, m, r, start))
}

/// Primes `p <= start` with `p ≡ r (mod m)`, descending.
pub fn primes_in_class_descending(store: &PrimeStore, m: u64, r: u64, start: u64) -> Result<ResidueClassCursor<'_>> {
    validate(m, r)?;
    if start > store.max_supported() {
        return Err(Error::Range {
            value: start,
            what: "descending cursor start",
        });
    }
    Ok(ResidueClassCursor::descending(store, m, r, start))
}

impl<'a> ResidueClassCursor<'a> {
    /// Unchecked constructor for hot loops; `(m, r)` must already be a valid
    /// reduced class.
    #[inline]
    pub(crate) fn ascending(store: &'a PrimeStore, m: u64, r: u64, start: u64) -> Self {
        let odd_only = m & 1 == 1;
        let step = if odd_only { 2 * m } else { m };
        let two_pending = start <= 2 && 2 % m == r;
        // smallest c >= max(start, 3) with c ≡ r (mod m), then made odd
        let from = start.max(3);
        let mut c = from + (r + m - from % m) % m;
        if odd_only && c & 1 == 0 {
            c += m;
        }
        ResidueClassCursor {
            store,
            modulus: m,
            residue: r,
            direction: Direction::Ascending,
            next: Some(c),
            step,
            two_pending,
        }
    }

    #[inline]
    pub(crate) fn descending(store: &'a PrimeStore, m: u64, r: u64, start: u64) -> Self {
        let odd_only = m & 1 == 1;
        let step = if odd_only { 2 * m } else { m };
        let two_pending = start >= 2 && 2 % m == r;
        // largest c <= start with c ≡ r (mod m), then made odd; below 3 nothing odd is prime
        let mut next = start.checked_sub((start % m + m - r) % m);
        if odd_only {
            next = next.and_then(|c| if c & 1 == 0 { c.checked_sub(m) } else { Some(c) });
        }
        ResidueClassCursor {
            store,
            modulus: m,
            residue: r,
            direction: Direction::Descending,
            next: next.filter(|&c| c >= 3),
            step,
            two_pending,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Next candidate value the cursor will test, `None` when exhausted.
    pub fn position(&self) -> Option<u64> {
        if self.two_pending && self.direction == Direction::Ascending {
            Some(2)
        } else {
            self.next.or(if self.two_pending { Some(2) } else { None })
        }
    }
}

impl Iterator for ResidueClassCursor<'_> {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        match self.direction {
            Direction::Ascending => {
                if self.two_pending {
                    self.two_pending = false;
                    return Some(2);
                }
                let max = self.store.max_supported();
                while let Some(c) = self.next {
                    if c > max {
                        self.next = None;
                        break;
                    }
                    self.next = c.checked_add(self.step);
                    if self.store.is_prime_unchecked(c) {
                        return Some(c);
                    }
                }
                None
            }
            Direction::Descending => {
                while let Some(c) = self.next {
                    self.next = c.checked_sub(self.step).filter(|&x| x >= 3);
                    if self.store.is_prime_unchecked(c) {
                        return Some(c);
                    }
                }
                if self.two_pending {
                    self.two_pending = false;
                    return Some(2);
                }
                None
            }
        }
    }
}
