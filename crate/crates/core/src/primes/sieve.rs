//! Sieve of Eratosthenes, in two shapes: a plain bitmap over an arbitrary
//! window `[lo, hi]`, and a segmented odd-only bitset from 0 to a limit that
//! backs [`PrimeStore`](super::PrimeStore).

use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 22;
pub const DEFAULT_MEMORY_BUDGET: u64 = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    /// Values covered by one cache-resident segment.
    pub segment_size: u64,
    /// Upper bound on bytes a single bitmap may occupy.
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_size: DEFAULT_SEGMENT_SIZE,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Primes up to `n` inclusive, by a simple unsegmented sieve.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Primality bitmap of the closed window `[lo, hi]`: bit `i` is set iff
/// `lo + i` is prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeBitmap {
    lo: u64,
    len: u64,
    words: Vec<u64>,
}

impl RangeBitmap {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.len - 1
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether bit `i` (the value `lo + i`) is set.
    pub fn bit(&self, i: u64) -> bool {
        i < self.len && self.words[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    pub fn contains(&self, v: u64) -> bool {
        v >= self.lo && self.bit(v - self.lo)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).filter(|&i| self.bit(i)).map(move |i| self.lo + i)
    }

    /// The 64 bits starting at bit `offset`, zero-filled past the end.
    #[inline(always)]
    pub fn bits_at(&self, offset: u64) -> u64 {
        let w = (offset >> 6) as usize;
        let sh = offset & 63;
        let lo = self.words.get(w).copied().unwrap_or(0);
        if sh == 0 {
            return lo;
        }
        let hi = self.words.get(w + 1).copied().unwrap_or(0);
        (lo >> sh) | (hi << (64 - sh))
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }
}

pub fn sieve_range(lo: u64, hi: u64) -> Result<RangeBitmap> {
    sieve_range_with(lo, hi, &SieveConfig::default())
}

pub fn sieve_range_with(lo: u64, hi: u64, config: &SieveConfig) -> Result<RangeBitmap> {
    if lo > hi {
        return Err(Error::Contract(format!("sieve window [{lo}, {hi}] is empty")));
    }
    let len = hi - lo + 1;
    let bytes = len.div_ceil(8);
    if bytes > config.memory_budget {
        return Err(Error::Resource {
            what: "sieve window",
            needed: bytes,
            budget: config.memory_budget,
        });
    }
    let mut words = vec![!0u64; len.div_ceil(64) as usize];
    if !len.is_multiple_of(64) {
        *words.last_mut().unwrap() = (1u64 << (len % 64)) - 1;
    }
    let mut clear = |i: u64| words[(i >> 6) as usize] &= !(1u64 << (i & 63));
    for v in lo..=hi.min(1) {
        clear(v - lo);
    }
    let sieving = primes_up_to(isqrt(hi));
    let seg = config.segment_size.max(1);
    let mut seg_lo = lo;
    loop {
        let seg_hi = hi.min(seg_lo.saturating_add(seg - 1));
        for &p in &sieving {
            let first = (p * p).max(seg_lo.div_ceil(p) * p);
            let mut m = first;
            while m <= seg_hi {
                clear(m - lo);
                m += p;
            }
        }
        if seg_hi == hi {
            break;
        }
        seg_lo = seg_hi + 1;
    }
    Ok(RangeBitmap { lo, len, words })
}

/// Moves the low 32 bits of `x` to the even bit positions.
#[inline(always)]
fn spread32(x: u64) -> u64 {
    let mut x = x & 0xFFFF_FFFF;
    x = (x | x << 16) & 0x0000_FFFF_0000_FFFF;
    x = (x | x << 8) & 0x00FF_00FF_00FF_00FF;
    x = (x | x << 4) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | x << 2) & 0x3333_3333_3333_3333;
    (x | x << 1) & 0x5555_5555_5555_5555
}

/// Expands the odd-only bitset into a one-bit-per-value bitmap of
/// `[lo, hi]`; `lo` must be a multiple of 128 so that each odd-only word
/// lands on exactly two output words.
pub(crate) fn spread_odd_bits(odd: &[u64], lo: u64, hi: u64) -> RangeBitmap {
    debug_assert_eq!(lo % 128, 0);
    let len = hi - lo + 1;
    let n_words = len.div_ceil(64) as usize;
    let mut words = vec![0u64; n_words + 1];
    let w0 = (lo / 128) as usize;
    for (j, pair) in words.chunks_mut(2).enumerate() {
        let x = odd.get(w0 + j).copied().unwrap_or(0);
        pair[0] = spread32(x) << 1;
        if pair.len() > 1 {
            pair[1] = spread32(x >> 32) << 1;
        }
    }
    words.truncate(n_words);
    if lo == 0 && hi >= 2 {
        words[0] |= 1 << 2;
    }
    if !len.is_multiple_of(64) {
        *words.last_mut().unwrap() &= (1u64 << (len % 64)) - 1;
    }
    RangeBitmap { lo, len, words }
}

/// Odd-only bitset of primality up to `limit`: bit `i` stands for `2i + 1`.
pub(crate) fn odd_bitset(limit: u64, segment_size: u64) -> Vec<u64> {
    let n_bits = limit / 2 + 1; // indices 0..=limit/2 cover odd values <= limit (+1 slack)
    let mut words = vec![!0u64; n_bits.div_ceil(64) as usize];
    // index 0 is the value 1
    words[0] &= !1;
    let sieving: Vec<u64> = primes_up_to(isqrt(limit)).into_iter().skip(1).collect();
    // next index to clear per sieving prime, starting at p^2
    let mut next: Vec<u64> = sieving.iter().map(|&p| (p * p) >> 1).collect();
    let seg_bits = (segment_size / 2).max(64);
    let mut seg_lo = 0u64;
    while seg_lo < n_bits {
        let seg_hi = n_bits.min(seg_lo + seg_bits);
        for (k, &p) in sieving.iter().enumerate() {
            let mut i = next[k];
            while i < seg_hi {
                words[(i >> 6) as usize] &= !(1u64 << (i & 63));
                i += p;
            }
            next[k] = i;
        }
        seg_lo = seg_hi;
    }
    // drop anything above the limit
    let first_above = limit.div_ceil(2);
    let w = (first_above >> 6) as usize;
    if w < words.len() {
        words[w] &= (1u64 << (first_above & 63)) - 1;
        for x in &mut words[w + 1..] {
            *x = 0;
        }
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(v: u64) -> bool {
        v >= 2 && (2..).take_while(|d| d * d <= v).all(|d| !v.is_multiple_of(d))
    }

    #[test]
    fn first_primes() {
        let b = sieve_range(0, 10).unwrap();
        assert_eq!(b.primes().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
    }

    #[test]
    fn singleton_window() {
        let b = sieve_range(2, 2).unwrap();
        assert_eq!(b.primes().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn window_above_a_million() {
        let b = sieve_range(1_000_000, 1_000_100).unwrap();
        let expected: Vec<u64> = (1_000_000..=1_000_100).filter(|&v| trial_division(v)).collect();
        assert_eq!(expected.len(), 6);
        assert_eq!(b.primes().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn small_segments_match_trial_division() {
        let cfg = SieveConfig {
            segment_size: 7,
            memory_budget: 1 << 20,
        };
        let b = sieve_range_with(90, 1_000, &cfg).unwrap();
        for v in 90..=1_000 {
            assert_eq!(b.contains(v), trial_division(v), "{v}");
        }
    }

    #[test]
    fn budget_exceeded() {
        let cfg = SieveConfig {
            segment_size: 1024,
            memory_budget: 10,
        };
        assert!(matches!(sieve_range_with(0, 1_000, &cfg), Err(Error::Resource { .. })));
        assert!(sieve_range(5, 4).is_err());
    }

    #[test]
    fn spread_window_matches_plain_sieve() {
        let limit = 20_000;
        let odd = odd_bitset(limit, 1 << 10);
        for (lo, hi) in [(0, 1), (0, 2), (0, 64), (128, 191), (256, 10_000), (1280, 20_000), (19_968, 20_000)] {
            let fast = spread_odd_bits(&odd, lo, hi);
            assert_eq!(fast, sieve_range(lo, hi).unwrap(), "[{lo}, {hi}]");
        }
        let b = sieve_range(0, 300).unwrap();
        assert_eq!(b.bits_at(0) & 0b1110_1100, 0b1010_1100);
        assert_eq!(b.bits_at(97) & 1, 1);
        assert_eq!(b.bits_at(290) >> 10, 0);
    }

    #[test]
    fn odd_bitset_edges() {
        for limit in [2u64, 3, 63, 64, 127, 128, 129, 1000] {
            let w = odd_bitset(limit, 64);
            for i in 0..w.len() as u64 * 64 {
                let v = 2 * i + 1;
                let set = w[(i >> 6) as usize] >> (i & 63) & 1 == 1;
                assert_eq!(set, v <= limit && trial_division(v), "limit {limit} v {v}");
            }
        }
    }
}
