use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::CoeffPair;
use crate::predictor::Rational;
use crate::sweep::PairSummary;

/// One line of the sweep CSV. Averages are rounded; `sum_pmin` is exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m1: u64,
    pub m2: u64,
    #[serde(rename = "L")]
    pub limit: u64,
    pub k_hat: u64,
    pub count_n: u64,
    pub avg_pmin: String,
    pub max_pmin: u64,
    pub max_at: u64,
    pub counterexample_count: u64,
    pub sum_pmin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_qmax: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_qmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_qmax_at: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum_qmax: Option<String>,
}

impl SweepRow {
    pub fn from_summary(s: &PairSummary, precision: u32) -> Self {
        let q = s.qstats;
        SweepRow {
            m1: s.pair.m1(),
            m2: s.pair.m2(),
            limit: s.threshold,
            k_hat: s.k_hat,
            count_n: s.count_n,
            avg_pmin: s.average_pmin_decimal(precision).unwrap_or_default(),
            max_pmin: s.max_pmin,
            max_at: s.max_pmin_at,
            counterexample_count: s.counterexamples.len() as u64,
            sum_pmin: s.sum_pmin.to_string(),
            avg_qmax: q.map(|_| s.average_qmax_decimal(precision).unwrap_or_default()),
            max_qmax: q.map(|q| q.max_qmax),
            max_qmax_at: q.map(|q| q.max_qmax_at),
            sum_qmax: q.map(|q| q.sum_qmax.to_string()),
        }
    }

    pub fn pair(&self) -> Result<CoeffPair> {
        CoeffPair::new(self.m1, self.m2).map_err(|e| Error::Input(format!("sweep row {}:{}: {e}", self.m1, self.m2)))
    }

    /// Exact average `sum_pmin / count_n`.
    pub fn exact_average(&self) -> Result<Option<Rational>> {
        if self.count_n == 0 {
            return Ok(None);
        }
        let sum: BigUint = self
            .sum_pmin
            .parse()
            .map_err(|_| Error::Input(format!("sweep row {}:{}: bad sum_pmin {:?}", self.m1, self.m2, self.sum_pmin)))?;
        Ok(Some(Rational::new(sum, BigUint::from(self.count_n))))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Input(format!("{}: {other:?}", path.display())),
    }
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a sweep CSV and checks that it covers one threshold with no repeated pair.
pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let rows: Vec<SweepRow> = r
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_err(path, e))?;
    let mut seen = BTreeSet::new();
    for row in &rows {
        if !seen.insert(row.pair()?) {
            return Err(Error::Input(format!("{}: pair {}:{} appears twice", path.display(), row.m1, row.m2)));
        }
        if row.limit != rows[0].limit {
            return Err(Error::Input(format!(
                "{}: mixed thresholds {} and {}",
                path.display(),
                rows[0].limit,
                row.limit
            )));
        }
    }
    Ok(rows)
}

/// Whitespace-separated `x y` lines under a `#` header.
pub fn write_points(path: &Path, header: (&str, &str), points: &[(String, String)]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    let io = |e| Error::io(path, e);
    writeln!(w, "# {} {}", header.0, header.1).map_err(io)?;
    for (x, y) in points {
        writeln!(w, "{x} {y}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir.to_path_buf())
}

/// Header plus string records, for tables whose columns depend on flags.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
