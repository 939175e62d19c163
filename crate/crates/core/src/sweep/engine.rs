//! Word-parallel segment scan.
//!
//! Write `n = c + m2·k` with `c = n mod m2`. Every usable `p` for such `n`
//! satisfies `m1·p ≡ c (mod m2)`, and then `q = k - d` with
//! `d = (m1·p - c)/m2`. So for one prime `p` the question "is `q` prime?"
//! for every still-open `n` of class `c` is a single AND of the open-set
//! word against the prime bitmap shifted by `d`. Primes `p` are taken in
//! ascending order, so the first hit for each `n` is its p-minimal
//! partition. Open `n` that survive all small primes go through the
//! per-`n` search.
//!
//! Hits fold straight into running statistics by popcount. A segment
//! holding a counterexample is redone through a per-`n` table instead,
//! since the statistics restart after it.

use crate::arith::{gcd, mod_inverse, mul_mod, ExactDivisor};
use crate::partitions::{is_admissible, CoeffPair, PairSearch};
use crate::primes::{PrimeStore, RangeBitmap, ResidueClassCursor};

use super::summary::{PartialSummary, QStats, TailStats};
use super::AdmissibleWheel;

/// Primes below this bound are handled word-parallel.
pub(crate) const SMALL_PRIME_BOUND: u64 = 1 << 16;

pub(crate) struct BlockEngine<'a> {
    store: &'a PrimeStore,
    pair: CoeffPair,
    search: PairSearch<'a>,
    wheel: AdmissibleWheel,
    div_m2: ExactDivisor,
    /// `class_of[c]` = residue of `p` mod `m2` serving `n ≡ c`.
    class_of: Vec<u64>,
    /// Primes below `SMALL_PRIME_BOUND`, bucketed by residue mod `m2`.
    class_primes: Vec<Vec<u64>>,
    /// Admissibility of `c + m2·k` for `k` in `[0, 64·period)`, twice over,
    /// where the pattern in `k` repeats with `period = wheel / m2`.
    patterns: Vec<Vec<u64>>,
    k_period: u64,
    bound: u64,
}

/// Where [`BlockEngine::run`] reports each resolved `n`.
trait Sink {
    /// Bit `b` of `hits` is `n = c + m2·(k0 + b)`, solved by `p` with `q = k0 + b - d`.
    fn hits(&mut self, c: usize, w: usize, k0: u64, p: u64, d: u64, hits: u64);
    /// `n` at offset `i` of class `c`, solved by `p`.
    fn single(&mut self, c: usize, i: usize, n: u64, p: u64);
    /// `n` has no partition; false abandons the run.
    fn none(&mut self, n: u64) -> bool;
}

impl<'a> BlockEngine<'a> {
    pub(crate) fn new(store: &'a PrimeStore, pair: CoeffPair, wheel: AdmissibleWheel) -> Self {
        Self::with_small_bound(store, pair, wheel, SMALL_PRIME_BOUND)
    }

    pub(crate) fn with_small_bound(store: &'a PrimeStore, pair: CoeffPair, wheel: AdmissibleWheel, bound: u64) -> Self {
        let (m1, m2) = (pair.m1(), pair.m2());
        let inv = mod_inverse(m1 % m2, m2).expect("coprime coefficients");
        let class_of = (0..m2).map(|c| mul_mod(c, inv, m2)).collect();
        let bound = bound.max(2).min(store.max_supported().saturating_add(1));
        let mut class_primes = vec![Vec::new(); m2 as usize];
        for p in ResidueClassCursor::ascending(store, 1, 0, 2).take_while(|&p| p < bound) {
            class_primes[(p % m2) as usize].push(p);
        }
        let k_period = wheel.period / m2;
        let patterns = (0..m2)
            .map(|c| {
                if !class_in_use(c, m2) {
                    return Vec::new();
                }
                let mut words = vec![0u64; 2 * k_period as usize + 1];
                for j in 0..words.len() as u64 * 64 {
                    if is_admissible(pair, c + m2 * (j % k_period + k_period)) {
                        words[(j >> 6) as usize] |= 1 << (j & 63);
                    }
                }
                words
            })
            .collect();
        BlockEngine {
            store,
            pair,
            search: PairSearch::new(store, pair),
            wheel,
            div_m2: ExactDivisor::new(m2),
            class_of,
            class_primes,
            patterns,
            k_period,
            bound,
        }
    }

    /// Partial summary of `[lo, hi]`.
    pub(crate) fn scan(&self, lo: u64, hi: u64, with_q: bool) -> PartialSummary {
        let mut agg = Aggregate::new(self.pair, with_q);
        if self.run(lo, hi, &mut agg) {
            let mut part = PartialSummary::empty(self.pair, lo, with_q);
            part.last_n = hi;
            part.tail = agg.tail;
            return part;
        }
        self.scan_exact(lo, hi, with_q)
    }

    /// [`scan`](Self::scan) through the per-`n` table.
    fn scan_exact(&self, lo: u64, hi: u64, with_q: bool) -> PartialSummary {
        let m1 = self.pair.m1();
        let table = self.resolve(lo, hi);
        let mut part = PartialSummary::empty(self.pair, lo, with_q);
        part.last_n = hi;
        self.wheel.for_each(lo, hi, |n, c, k| match table.get(n, c, k) {
            0 => {
                part.counterexamples.push(n);
                part.tail = TailStats::empty(with_q);
            }
            p => part.tail.record(n, p, self.div_m2.divide(n - m1 * p)),
        });
        part
    }

    /// p-minimal `p` for every admissible `n` in `[lo, hi]`, 0 where none.
    fn resolve(&self, lo: u64, hi: u64) -> PminTable {
        let m2 = self.pair.m2();
        let k_base = lo / m2;
        let k_words = (hi / m2 - k_base + 1).div_ceil(64) as usize;
        let mut table = PminTable {
            k_base,
            classes: (0..m2)
                .map(|c| if class_in_use(c, m2) { vec![0u32; k_words * 64] } else { Vec::new() })
                .collect(),
            large: Vec::new(),
        };
        self.run(lo, hi, &mut table);
        table.large.sort_unstable();
        table
    }

    /// Admissible `n = c + m2·k` in `[lo, hi]`, bit `i` of the result
    /// standing for `k = k_base + i`.
    fn open_words(&self, c: u64, lo: u64, hi: u64, k_base: u64, k_len: u64) -> Vec<u64> {
        let m2 = self.pair.m2();
        let pattern = &self.patterns[c as usize];
        let start = k_base % (64 * self.k_period);
        let (a, r) = ((start >> 6) as usize, start & 63);
        let period = self.k_period as usize;
        let mut words: Vec<u64> = (0..k_len.div_ceil(64) as usize)
            .map(|w| {
                let j = (a + w) % period;
                if r == 0 {
                    pattern[j]
                } else {
                    (pattern[j] >> r) | (pattern[j + 1] << (64 - r))
                }
            })
            .collect();
        if c + m2 * k_base < lo {
            words[0] &= !1;
        }
        let last = k_len - 1;
        if c + m2 * (k_base + last) > hi {
            words[(last >> 6) as usize] &= !(1 << (last & 63));
        }
        if !k_len.is_multiple_of(64) {
            *words.last_mut().unwrap() &= (1u64 << (k_len % 64)) - 1;
        }
        words
    }

    /// Resolves every admissible `n` in `[lo, hi]` into `sink`; false if
    /// the sink abandoned the run.
    fn run(&self, lo: u64, hi: u64, sink: &mut impl Sink) -> bool {
        let (m1, m2) = (self.pair.m1(), self.pair.m2());
        let k_base = lo / m2;
        let k_len = hi / m2 - k_base + 1;
        let k_words = k_len.div_ceil(64) as usize;

        // q = k - d ranges over [k_base - d_max, k_base + k_len)
        let d_max = (m1 * self.bound) / m2 + 1;
        let q_lo = k_base.saturating_sub(d_max) / 128 * 128;
        let q_hi = (k_base + k_len).min(self.store.max_supported());
        let primes = self
            .store
            .primality_window(q_lo, q_hi.max(q_lo))
            .expect("window lies inside the store");

        for ci in 0..m2 as usize {
            if self.patterns[ci].is_empty() {
                continue;
            }
            let c = ci as u64;
            let mut set = self.open_words(c, lo, hi, k_base, k_len);
            let mut live: Vec<u32> = (0..k_words as u32).filter(|&w| set[w as usize] != 0).collect();
            for &p in &self.class_primes[self.class_of[ci] as usize] {
                if live.is_empty() {
                    break;
                }
                let d = self.div_m2.divide(m1 * p - c);
                live.retain(|&w| {
                    let word = &mut set[w as usize];
                    // bit 0 of the word is k = k_base + 64w, i.e. q = k_base + 64w - d
                    let k0 = k_base + 64 * u64::from(w);
                    let hits = *word & shifted_bits(&primes, q_lo, k0 as i64 - d as i64);
                    if hits != 0 {
                        *word &= !hits;
                        sink.hits(ci, w as usize, k0, p, d, hits);
                    }
                    *word != 0
                });
            }
            // survivors need primes beyond the word-parallel range
            for w in live {
                let mut bits = set[w as usize];
                while bits != 0 {
                    let i = 64 * w as usize + bits.trailing_zeros() as usize;
                    let n = c + m2 * (k_base + i as u64);
                    match self.search.search_from(n, self.bound).p_min() {
                        Some(p) => sink.single(ci, i, n, p),
                        None if sink.none(n) => {}
                        None => return false,
                    }
                    bits &= bits - 1;
                }
            }
        }
        true
    }
}

fn class_in_use(c: u64, m2: u64) -> bool {
    m2 == 1 || gcd(c, m2) == 1
}

/// Tail statistics folded from hit words, for runs without counterexamples.
struct Aggregate {
    m1: u64,
    m2: u64,
    tail: TailStats,
}

impl Aggregate {
    fn new(pair: CoeffPair, with_q: bool) -> Self {
        Aggregate {
            m1: pair.m1(),
            m2: pair.m2(),
            tail: TailStats::empty(with_q),
        }
    }

    // hits arrive grouped by class, not in order of n, so ties compare n
    #[inline]
    fn note_p(&mut self, p: u64, n: u64) {
        let t = &mut self.tail;
        if p > t.max_pmin || (p == t.max_pmin && n < t.max_pmin_at) {
            t.max_pmin = p;
            t.max_pmin_at = n;
        }
    }
}

#[inline]
fn note_q(qs: &mut QStats, q: u64, n: u64) {
    if q > qs.max_qmax || (q == qs.max_qmax && n < qs.max_qmax_at) {
        qs.max_qmax = q;
        qs.max_qmax_at = n;
    }
}

/// Masks of the bit positions whose index has bit `j` set.
const INDEX_BIT_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Sum of the indices of the set bits of `x`.
#[inline]
fn index_sum(x: u64) -> u64 {
    INDEX_BIT_MASKS
        .iter()
        .enumerate()
        .map(|(j, m)| u64::from((x & m).count_ones()) << j)
        .sum()
}

impl Sink for Aggregate {
    #[inline]
    fn hits(&mut self, c: usize, _w: usize, k0: u64, p: u64, d: u64, hits: u64) {
        let cnt = u64::from(hits.count_ones());
        self.tail.count += cnt;
        self.tail.sum_pmin += u128::from(p * cnt);
        if p >= self.tail.max_pmin {
            let n = c as u64 + self.m2 * (k0 + u64::from(hits.trailing_zeros()));
            self.note_p(p, n);
        }
        if let Some(qs) = &mut self.tail.q {
            // every hit has q >= 2, so k0 + b - d never goes negative for set b
            let sum = i128::from(cnt) * (i128::from(k0) - i128::from(d)) + i128::from(index_sum(hits));
            qs.sum_qmax += sum as u128;
            let top = 63 - u64::from(hits.leading_zeros());
            note_q(qs, k0 + top - d, c as u64 + self.m2 * (k0 + top));
        }
    }

    fn single(&mut self, _c: usize, _i: usize, n: u64, p: u64) {
        self.tail.count += 1;
        self.tail.sum_pmin += u128::from(p);
        self.note_p(p, n);
        if let Some(qs) = &mut self.tail.q {
            let q = (n - self.m1 * p) / self.m2;
            qs.sum_qmax += u128::from(q);
            note_q(qs, q, n);
        }
    }

    fn none(&mut self, _n: u64) -> bool {
        false
    }
}

/// `p*` per class of `n mod m2` and offset `k - k_base`; `u32::MAX` defers
/// to `large`.
struct PminTable {
    k_base: u64,
    classes: Vec<Vec<u32>>,
    large: Vec<(u64, u64)>,
}

impl PminTable {
    #[inline]
    fn get(&self, n: u64, c: usize, k: u64) -> u64 {
        match self.classes[c][(k - self.k_base) as usize] {
            u32::MAX => {
                let i = self.large.binary_search_by_key(&n, |e| e.0).expect("recorded large p");
                self.large[i].1
            }
            v => u64::from(v),
        }
    }
}

impl Sink for PminTable {
    fn hits(&mut self, c: usize, w: usize, _k0: u64, p: u64, _d: u64, mut hits: u64) {
        let slots = &mut self.classes[c][64 * w..];
        while hits != 0 {
            slots[hits.trailing_zeros() as usize] = p as u32;
            hits &= hits - 1;
        }
    }

    fn single(&mut self, c: usize, i: usize, n: u64, p: u64) {
        self.classes[c][i] = match u32::try_from(p) {
            Ok(v) if v != u32::MAX => v,
            _ => {
                self.large.push((n, p));
                u32::MAX
            }
        };
    }

    fn none(&mut self, _n: u64) -> bool {
        true
    }
}

/// Primality bits for `q_start..q_start + 64`, with `q < 0` reading as not
/// prime. `q_start >= q_lo` unless `q_lo == 0`.
#[inline(always)]
fn shifted_bits(primes: &RangeBitmap, q_lo: u64, q_start: i64) -> u64 {
    if q_start >= 0 {
        primes.bits_at(q_start as u64 - q_lo)
    } else if q_start > -64 {
        primes.bits_at(0) << (-q_start) as u32
    } else {
        0
    }
}
