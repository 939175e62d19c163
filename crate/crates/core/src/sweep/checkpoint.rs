//! Checkpoint envelope for an in-progress pair sweep.
//!
//! Layout (UTF-8 text, three lines):
//!
//! ```text
//! ggc-sweep-checkpoint v1
//! {"pair":[1,2],"threshold":...,...}
//! sha256:<hex digest of the JSON line>
//! ```
//!
//! Unbounded sums travel as decimal strings. Files are written to a sibling
//! temporary path and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::summary::{PartialSummary, QStats, TailStats};
use crate::error::{Error, Result};
use crate::partitions::{is_admissible, CoeffPair};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "ggc-sweep-checkpoint";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    /// Target threshold of the run that wrote this checkpoint.
    pub threshold: u64,
    pub partial: PartialSummary,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QBody {
    sum_qmax: String,
    max_qmax: u64,
    max_qmax_at: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Body {
    pair: (u64, u64),
    threshold: u64,
    first_n: u64,
    last_completed_n: u64,
    counterexamples: Vec<u64>,
    count_n: u64,
    sum_pmin: String,
    max_pmin: u64,
    max_pmin_at: u64,
    qstats: Option<QBody>,
}

fn digest(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

pub fn checkpoint_path(dir: &Path, pair: CoeffPair) -> PathBuf {
    dir.join(format!("sweep_{}_{}.ckpt", pair.m1(), pair.m2()))
}

impl Checkpoint {
    pub fn pair(&self) -> CoeffPair {
        self.partial.pair
    }

    pub fn last_completed_n(&self) -> u64 {
        self.partial.last_n
    }

    pub fn encode(&self) -> String {
        let p = &self.partial;
        let body = Body {
            pair: p.pair.into(),
            threshold: self.threshold,
            first_n: p.first_n,
            last_completed_n: p.last_n,
            counterexamples: p.counterexamples.clone(),
            count_n: p.tail.count,
            sum_pmin: p.tail.sum_pmin.to_string(),
            max_pmin: p.tail.max_pmin,
            max_pmin_at: p.tail.max_pmin_at,
            qstats: p.tail.q.map(|q| QBody {
                sum_qmax: q.sum_qmax.to_string(),
                max_qmax: q.max_qmax,
                max_qmax_at: q.max_qmax_at,
            }),
        };
        let json = serde_json::to_string(&body).expect("checkpoint body serializes");
        format!("{MAGIC} v{CHECKPOINT_VERSION}\n{json}\nsha256:{}\n", digest(&json))
    }

    /// Parses and validates an envelope; `origin` only labels errors.
    pub fn decode(text: &str, origin: &Path) -> Result<Checkpoint> {
        let fail = |reason: String| Error::Checkpoint {
            path: origin.to_path_buf(),
            reason,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| fail("empty file".into()))?;
        let version = header
            .strip_prefix(MAGIC)
            .and_then(|v| v.trim().strip_prefix('v'))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| fail(format!("bad header {header:?}")))?;
        if version != CHECKPOINT_VERSION {
            return Err(fail(format!("unsupported version {version}")));
        }
        let json = lines.next().ok_or_else(|| fail("missing body".into()))?;
        let sum = lines
            .next()
            .and_then(|l| l.strip_prefix("sha256:"))
            .ok_or_else(|| fail("missing digest".into()))?;
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(fail("trailing content".into()));
        }
        if sum != digest(json) {
            return Err(fail("digest mismatch".into()));
        }
        let body: Body = serde_json::from_str(json).map_err(|e| fail(format!("malformed body: {e}")))?;
        let parse_sum = |s: &str| s.parse::<u128>().map_err(|_| fail(format!("bad sum {s:?}")));
        let pair = CoeffPair::new(body.pair.0, body.pair.1).map_err(|e| fail(e.to_string()))?;
        let q = match &body.qstats {
            Some(qb) => Some(QStats {
                sum_qmax: parse_sum(&qb.sum_qmax)?,
                max_qmax: qb.max_qmax,
                max_qmax_at: qb.max_qmax_at,
            }),
            None => None,
        };
        let partial = PartialSummary {
            pair,
            first_n: body.first_n,
            last_n: body.last_completed_n,
            counterexamples: body.counterexamples,
            tail: TailStats {
                count: body.count_n,
                sum_pmin: parse_sum(&body.sum_pmin)?,
                max_pmin: body.max_pmin,
                max_pmin_at: body.max_pmin_at,
                q,
            },
        };
        validate(&partial).map_err(fail)?;
        Ok(Checkpoint {
            threshold: body.threshold,
            partial,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("ckpt.tmp");
        fs::write(&tmp, self.encode()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::decode(&text, path)
    }
}

fn validate(p: &PartialSummary) -> std::result::Result<(), String> {
    if p.first_n != 1 {
        return Err(format!("sweep must start at n = 1, found {}", p.first_n));
    }
    if !p.counterexamples.windows(2).all(|w| w[0] < w[1]) {
        return Err("counterexamples not strictly ascending".into());
    }
    if let Some(&bad) = p
        .counterexamples
        .iter()
        .find(|&&n| n < p.first_n || n > p.last_n || !is_admissible(p.pair, n))
    {
        return Err(format!("counterexample {bad} outside the swept admissible range"));
    }
    let k_hat = p.counterexamples.last().copied().unwrap_or(0);
    let t = &p.tail;
    if t.count == 0 {
        if t.sum_pmin != 0 || t.max_pmin != 0 || t.max_pmin_at != 0 {
            return Err("statistics present without counted n".into());
        }
    } else {
        let at = t.max_pmin_at;
        if at <= k_hat || at > p.last_n || !is_admissible(p.pair, at) {
            return Err(format!("maximum position {at} outside the window"));
        }
        if t.max_pmin < 2 || t.sum_pmin < u128::from(t.count) * 2 || t.sum_pmin > u128::from(t.count) * u128::from(t.max_pmin)
        {
            return Err("sum and maximum are inconsistent".into());
        }
        if p.pair.m1() * t.max_pmin > at {
            return Err("maximum exceeds its position".into());
        }
    }
    Ok(())
}
