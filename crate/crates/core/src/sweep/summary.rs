use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::CoeffPair;

/// Running statistics of `p*` (and optionally `q**`) over the found `n`
/// that follow the latest counterexample seen so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TailStats {
    pub count: u64,
    pub sum_pmin: u128,
    pub max_pmin: u64,
    pub max_pmin_at: u64,
    pub q: Option<QStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QStats {
    pub sum_qmax: u128,
    pub max_qmax: u64,
    pub max_qmax_at: u64,
}

impl QStats {
    fn then(self, later: QStats) -> QStats {
        let (max_qmax, max_qmax_at) = if later.max_qmax > self.max_qmax {
            (later.max_qmax, later.max_qmax_at)
        } else {
            (self.max_qmax, self.max_qmax_at)
        };
        QStats {
            sum_qmax: self.sum_qmax + later.sum_qmax,
            max_qmax,
            max_qmax_at,
        }
    }
}

impl TailStats {
    pub(crate) fn empty(with_q: bool) -> Self {
        TailStats {
            q: with_q.then(QStats::default),
            ..Default::default()
        }
    }

    #[inline]
    pub(crate) fn record(&mut self, n: u64, p: u64, q: u64) {
        self.count += 1;
        self.sum_pmin += u128::from(p);
        if p > self.max_pmin {
            self.max_pmin = p;
            self.max_pmin_at = n;
        }
        if let Some(qs) = &mut self.q {
            qs.sum_qmax += u128::from(q);
            if q > qs.max_qmax {
                qs.max_qmax = q;
                qs.max_qmax_at = n;
            }
        }
    }

    /// Concatenation with statistics of a later stretch of `n`; on equal
    /// maxima the earlier position wins.
    pub(crate) fn then(self, later: TailStats) -> TailStats {
        let (max_pmin, max_pmin_at) = if later.max_pmin > self.max_pmin {
            (later.max_pmin, later.max_pmin_at)
        } else {
            (self.max_pmin, self.max_pmin_at)
        };
        TailStats {
            count: self.count + later.count,
            sum_pmin: self.sum_pmin + later.sum_pmin,
            max_pmin,
            max_pmin_at,
            q: match (self.q, later.q) {
                (Some(a), Some(b)) => Some(a.then(b)),
                _ => None,
            },
        }
    }
}

/// Statistics over a contiguous run of `n` values `[first_n, last_n]`.
///
/// Partials over adjacent ranges merge associatively into the partial of the
/// union, which is what lets segments be scanned in any grouping or on any
/// number of workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSummary {
    pub pair: CoeffPair,
    pub first_n: u64,
    /// Last covered `n`; `first_n - 1` when nothing is covered yet.
    pub last_n: u64,
    pub counterexamples: Vec<u64>,
    pub tail: TailStats,
}

impl PartialSummary {
    pub fn empty(pair: CoeffPair, first_n: u64, with_q: bool) -> Self {
        PartialSummary {
            pair,
            first_n,
            last_n: first_n - 1,
            counterexamples: Vec::new(),
            tail: TailStats::empty(with_q),
        }
    }

    pub fn with_qstats(&self) -> bool {
        self.tail.q.is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.last_n < self.first_n
    }

    /// Merges two partials over adjacent ranges, in either argument order.
    pub fn merge(self, other: PartialSummary) -> Result<PartialSummary> {
        if self.pair != other.pair || self.with_qstats() != other.with_qstats() {
            return Err(Error::Input("cannot merge partials of different sweeps".into()));
        }
        let (early, late) = if self.first_n <= other.first_n {
            (self, other)
        } else {
            (other, self)
        };
        if early.is_empty() {
            return Ok(late);
        }
        if late.is_empty() {
            return Ok(early);
        }
        if early.last_n + 1 != late.first_n {
            return Err(Error::Input(format!(
                "partials [{}, {}] and [{}, {}] are not adjacent",
                early.first_n, early.last_n, late.first_n, late.last_n
            )));
        }
        let tail = if late.counterexamples.is_empty() {
            early.tail.then(late.tail)
        } else {
            late.tail
        };
        let mut counterexamples = early.counterexamples;
        counterexamples.extend(late.counterexamples);
        Ok(PartialSummary {
            pair: early.pair,
            first_n: early.first_n,
            last_n: late.last_n,
            counterexamples,
            tail,
        })
    }

    pub fn finalize(self, threshold: u64) -> PairSummary {
        PairSummary {
            pair: self.pair,
            threshold,
            k_hat: self.counterexamples.last().copied().unwrap_or(0),
            counterexamples: self.counterexamples,
            count_n: self.tail.count,
            sum_pmin: self.tail.sum_pmin,
            max_pmin: self.tail.max_pmin,
            max_pmin_at: self.tail.max_pmin_at,
            qstats: self.tail.q,
        }
    }
}

/// Exact statistics of `p*` for one pair over the admissible
/// `k_hat < n <= threshold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSummary {
    pub pair: CoeffPair,
    pub threshold: u64,
    /// Largest admissible `n <= threshold` without a partition.
    pub k_hat: u64,
    /// Every admissible `n <= threshold` without a partition, ascending.
    pub counterexamples: Vec<u64>,
    pub count_n: u64,
    pub sum_pmin: u128,
    pub max_pmin: u64,
    pub max_pmin_at: u64,
    pub qstats: Option<QStats>,
}

impl PairSummary {
    /// No admissible `n` above `k_hat`; averages are undefined.
    pub fn is_empty(&self) -> bool {
        self.count_n == 0
    }

    pub fn average_pmin(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.sum_pmin as f64 / self.count_n as f64)
    }

    /// Average `p*` rounded half-even to `decimals` places, from the exact sum.
    pub fn average_pmin_decimal(&self, decimals: u32) -> Option<String> {
        (!self.is_empty()).then(|| ratio_to_decimal(self.sum_pmin, u128::from(self.count_n), decimals))
    }

    pub fn average_qmax_decimal(&self, decimals: u32) -> Option<String> {
        let q = self.qstats?;
        (!self.is_empty()).then(|| ratio_to_decimal(q.sum_qmax, u128::from(self.count_n), decimals))
    }
}

/// `num / den` rounded half-to-even at `decimals` places, without any
/// floating-point step.
pub fn ratio_to_decimal(num: u128, den: u128, decimals: u32) -> String {
    big_ratio_to_decimal(&BigUint::from(num), &BigUint::from(den), decimals)
}

/// [`ratio_to_decimal`] for arbitrary-size operands.
pub fn big_ratio_to_decimal(num: &BigUint, den: &BigUint, decimals: u32) -> String {
    assert!(!den.is_zero(), "zero denominator");
    let scale = BigUint::from(10u32).pow(decimals);
    let (mut q, r) = (num * &scale).div_rem(den);
    let twice = r * 2u32;
    if &twice > den || (&twice == den && q.is_odd()) {
        q += 1u32;
    }
    let (int, frac) = q.div_rem(&scale);
    if decimals == 0 {
        int.to_string()
    } else {
        format!("{int}.{:0>width$}", frac.to_string(), width = decimals as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_even_rounding() {
        assert_eq!(ratio_to_decimal(1, 8, 2), "0.12"); // 0.125 -> even
        assert_eq!(ratio_to_decimal(3, 8, 2), "0.38"); // 0.375 -> even
        assert_eq!(ratio_to_decimal(5, 8, 2), "0.62");
        assert_eq!(ratio_to_decimal(2, 3, 5), "0.66667");
        assert_eq!(ratio_to_decimal(7, 1, 3), "7.000");
        assert_eq!(ratio_to_decimal(5, 2, 0), "2"); // 2.5 -> even
        assert_eq!(ratio_to_decimal(7, 2, 0), "4");
        assert_eq!(ratio_to_decimal(1_000_001, 1_000_000, 5), "1.00000");
    }

    fn partial(first: u64, last: u64, ces: &[u64], tail: TailStats) -> PartialSummary {
        PartialSummary {
            pair: CoeffPair::new(1, 2).unwrap(),
            first_n: first,
            last_n: last,
            counterexamples: ces.to_vec(),
            tail,
        }
    }

    #[test]
    fn merge_resets_tail_after_counterexample() {
        let mut t1 = TailStats::empty(false);
        t1.record(9, 5, 2);
        let mut t2 = TailStats::empty(false);
        t2.record(21, 3, 9);
        let a = partial(1, 10, &[1, 3], t1);
        let b = partial(11, 20, &[], TailStats::empty(false));
        let c = partial(21, 30, &[], t2);
        let ab_c = a.clone().merge(b.clone()).unwrap().merge(c.clone()).unwrap();
        let a_bc = a.clone().merge(b.clone().merge(c.clone()).unwrap()).unwrap();
        assert_eq!(ab_c, a_bc);
        assert_eq!(ab_c.tail.count, 2);
        assert_eq!(ab_c.tail.max_pmin, 5);
        let d = partial(31, 40, &[33], TailStats::empty(false));
        let all = ab_c.merge(d).unwrap();
        assert_eq!(all.tail.count, 0);
        assert_eq!(all.counterexamples, vec![1, 3, 33]);
        assert!(partial(1, 10, &[], t1).merge(partial(12, 20, &[], t1)).is_err());
    }

    #[test]
    fn earlier_maximum_wins_ties() {
        let mut a = TailStats::empty(true);
        a.record(10, 7, 1);
        let mut b = TailStats::empty(true);
        b.record(20, 7, 1);
        let m = a.then(b);
        assert_eq!((m.max_pmin, m.max_pmin_at), (7, 10));
        assert_eq!(m.q.unwrap().max_qmax_at, 10);
    }
}
