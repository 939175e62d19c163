//! Ascending tie-aware rankings of coefficient pairs and Spearman's ρ.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::partitions::CoeffPair;
use crate::predictor::{rational_to_f64, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => rational_to_f64(r),
            Value::Float(f) => *f,
        }
    }

    fn compare(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<Rational> for Value {
    fn from(v: Rational) -> Self {
        Value::Exact(v)
    }
}

/// How tied values share ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Average of the spanned positions.
    #[default]
    Fractional,
    /// Lowest spanned position ("1224" competition ranking).
    Ordinal,
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fractional" => Ok(TiePolicy::Fractional),
            "ordinal" => Ok(TiePolicy::Ordinal),
            other => Err(Error::Config(format!("unknown tie policy {other:?} (fractional|ordinal)"))),
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiePolicy::Fractional => "fractional",
            TiePolicy::Ordinal => "ordinal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub pair: CoeffPair,
    pub value: Value,
    /// Ranks are halves or integers, kept exact.
    pub rank: Ratio<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub statistic_name: String,
    /// Ascending by value, ties by pair.
    pub entries: Vec<RankEntry>,
}

impl RankTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rank_of(&self, pair: CoeffPair) -> Option<Ratio<u64>> {
        self.entries.iter().find(|e| e.pair == pair).map(|e| e.rank)
    }

    /// Ranks keyed by pair.
    pub fn by_pair(&self) -> BTreeMap<CoeffPair, Ratio<u64>> {
        self.entries.iter().map(|e| (e.pair, e.rank)).collect()
    }
}

pub fn rank_by(statistic_name: &str, entries: Vec<(CoeffPair, Value)>, policy: TiePolicy) -> Result<RankTable> {
    let mut seen = BTreeSet::new();
    for (p, _) in &entries {
        if !seen.insert(*p) {
            return Err(Error::Input(format!("pair {p} appears twice in ranking {statistic_name}")));
        }
    }
    let mut sorted = entries;
    sorted.sort_by(|a, b| a.1.compare(&b.1).then(a.0.cmp(&b.0)));
    let mut ranks = Vec::with_capacity(sorted.len());
    let mut start = 0usize;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end].1.compare(&sorted[start].1) == Ordering::Equal {
            end += 1;
        }
        // 1-based positions start+1 ..= end
        let rank = match policy {
            TiePolicy::Fractional => Ratio::new((start + 1 + end) as u64, 2),
            TiePolicy::Ordinal => Ratio::from_integer(start as u64 + 1),
        };
        ranks.extend(std::iter::repeat_n(rank, end - start));
        start = end;
    }
    let entries = sorted
        .into_iter()
        .zip(ranks)
        .map(|((pair, value), rank)| RankEntry { pair, value, rank })
        .collect();
    Ok(RankTable {
        statistic_name: statistic_name.to_string(),
        entries,
    })
}

/// Pearson correlation of the two rank vectors, matched by pair.
pub fn spearman_rho(a: &RankTable, b: &RankTable) -> Result<f64> {
    let ra = a.by_pair();
    let rb = b.by_pair();
    if ra.len() != rb.len() || ra.keys().ne(rb.keys()) {
        return Err(Error::Input(format!(
            "rankings {} and {} cover different pair sets",
            a.statistic_name, b.statistic_name
        )));
    }
    let n = ra.len();
    if n < 2 {
        return Err(Error::Domain(format!("correlation needs at least 2 pairs, got {n}")));
    }
    // ranks are halves, so doubled ranks are integers and every sum is exact
    let xs: Vec<i128> = ra.values().map(|r| (2 * r.numer() / r.denom()) as i128).collect();
    let ys: Vec<i128> = rb.values().map(|r| (2 * r.numer() / r.denom()) as i128).collect();
    let nn = n as i128;
    let (sx, sy) = (xs.iter().sum::<i128>(), ys.iter().sum::<i128>());
    let sxy: i128 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let sxx: i128 = xs.iter().map(|x| x * x).sum();
    let syy: i128 = ys.iter().map(|y| y * y).sum();
    let cov = nn * sxy - sx * sy;
    let vx = nn * sxx - sx * sx;
    let vy = nn * syy - sy * sy;
    if vx == 0 || vy == 0 {
        return Err(Error::Domain("a ranking with all values tied has no correlation".into()));
    }
    let denom = match vx.checked_mul(vy) {
        Some(v) => (v as f64).sqrt(),
        None => (vx as f64).sqrt() * (vy as f64).sqrt(),
    };
    let rho = cov as f64 / denom;
    Ok(rho.clamp(-1.0, 1.0))
}
