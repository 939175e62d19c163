//! Per-pair scans over every admissible `n <= L`.
//!
//! The range `1..=L` is cut into fixed-length segments. Each segment is
//! scanned into a [`PartialSummary`]; partials merge associatively, so the
//! final [`PairSummary`] is independent of worker count and grouping. A
//! checkpoint is rewritten after every merged batch when a checkpoint
//! directory is configured.

mod checkpoint;
mod engine;
mod summary;

use std::collections::HashSet;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

pub use checkpoint::{checkpoint_path, Checkpoint, CHECKPOINT_VERSION};
pub use summary::{big_ratio_to_decimal, ratio_to_decimal, PairSummary, PartialSummary, QStats, TailStats};

use crate::error::{Error, Result};
use crate::partitions::{is_admissible, CoeffPair};
use engine::BlockEngine;
use crate::primes::PrimeStore;

/// 2^20 candidates of the admissible parity.
pub const DEFAULT_SEGMENT_LEN: u64 = 1 << 21;

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub include_qstats: bool,
    /// Length of one segment of consecutive `n`.
    pub segment_len: u64,
    pub checkpoint_dir: Option<PathBuf>,
    /// Progress lines on standard error.
    pub progress: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            include_qstats: false,
            segment_len: DEFAULT_SEGMENT_LEN,
            checkpoint_dir: None,
            progress: false,
        }
    }
}

/// Admissible residues of `n` modulo `lcm(2, m1·m2)`.
#[derive(Debug, Clone)]
pub(crate) struct AdmissibleWheel {
    period: u64,
    m2: u64,
    offsets: Vec<u64>,
    /// `(o mod m2, o / m2)` per offset; `period` is a multiple of `m2`.
    split: Vec<(usize, u64)>,
}

impl AdmissibleWheel {
    fn new(pair: CoeffPair) -> Self {
        let prod = pair.m1() * pair.m2();
        let period = if prod.is_multiple_of(2) { prod } else { 2 * prod };
        let offsets: Vec<u64> = (period..2 * period)
            .filter(|&n| is_admissible(pair, n))
            .map(|n| n - period)
            .collect();
        let m2 = pair.m2();
        let split = offsets.iter().map(|&o| ((o % m2) as usize, o / m2)).collect();
        AdmissibleWheel {
            period,
            m2,
            offsets,
            split,
        }
    }

    /// Calls `f(n, n mod m2, n / m2)` for admissible `n` in `[lo, hi]`, ascending.
    fn for_each(&self, lo: u64, hi: u64, mut f: impl FnMut(u64, usize, u64)) {
        let mut base = lo - lo % self.period;
        let mut k_base = base / self.m2;
        let k_step = self.period / self.m2;
        loop {
            for (&o, &(c, dk)) in self.offsets.iter().zip(&self.split) {
                let n = base + o;
                if n > hi {
                    return;
                }
                if n >= lo {
                    f(n, c, k_base + dk);
                }
            }
            base += self.period;
            k_base += k_step;
        }
    }
}

fn check_inputs(pair: CoeffPair, limit: u64, store: &PrimeStore) -> Result<()> {
    if limit < pair.m1() + pair.m2() {
        return Err(Error::Input(format!("threshold {limit} is below m1 + m2 for pair {pair}")));
    }
    if limit >= 1 << 63 {
        return Err(Error::Input(format!("threshold {limit} exceeds 2^63 - 1")));
    }
    let largest = limit / pair.m1().min(pair.m2());
    if largest > store.max_supported() {
        return Err(Error::Config(format!(
            "prime store covers {} but pair {pair} up to {limit} needs {largest}",
            store.max_supported()
        )));
    }
    Ok(())
}

fn run_from(mut partial: PartialSummary, limit: u64, store: &PrimeStore, opts: &SweepOptions) -> Result<PairSummary> {
    let pair = partial.pair;
    check_inputs(pair, limit, store)?;
    let engine = BlockEngine::new(store, pair, AdmissibleWheel::new(pair));
    let with_q = partial.with_qstats();
    let seg = opts.segment_len.max(1);
    let batch = 2 * rayon::current_num_threads().max(1) as u64;
    let ckpt_path = opts.checkpoint_dir.as_ref().map(|d| checkpoint_path(d, pair));
    let started = Instant::now();
    let resumed_from = partial.last_n;

    while partial.last_n < limit {
        let start = partial.last_n + 1;
        let bounds: Vec<(u64, u64)> = (0..batch)
            .map(|i| start.saturating_add(i * seg))
            .take_while(|&lo| lo <= limit)
            .map(|lo| (lo, limit.min(lo + seg - 1)))
            .collect();
        let parts: Vec<PartialSummary> = bounds
            .par_iter()
            .map(|&(lo, hi)| engine.scan(lo, hi, with_q))
            .collect();
        for p in parts {
            partial = partial.merge(p)?;
        }
        if let Some(path) = &ckpt_path {
            Checkpoint {
                threshold: limit,
                partial: partial.clone(),
            }
            .save(path)?;
        }
        if opts.progress {
            let done = (partial.last_n - resumed_from) as f64;
            let left = (limit - partial.last_n) as f64;
            let eta = started.elapsed().as_secs_f64() * left / done.max(1.0);
            eprintln!(
                "[sweep {pair}] n <= {} of {limit} ({:.1}%), eta {:.0}s",
                partial.last_n,
                100.0 * partial.last_n as f64 / limit as f64,
                eta
            );
        }
    }
    Ok(partial.finalize(limit))
}

/// Exact `p*` statistics for `pair` over every admissible `n <= limit`.
pub fn sweep_pair(pair: CoeffPair, limit: u64, store: &PrimeStore, opts: &SweepOptions) -> Result<PairSummary> {
    run_from(PartialSummary::empty(pair, 1, opts.include_qstats), limit, store, opts)
}

/// One summary per pair, in input order, computed on `workers` threads.
pub fn sweep_all(
    pairs: &[CoeffPair],
    limit: u64,
    store: &PrimeStore,
    workers: usize,
    opts: &SweepOptions,
) -> Result<Vec<PairSummary>> {
    let mut seen = HashSet::new();
    if let Some(dup) = pairs.iter().find(|p| !seen.insert(**p)) {
        return Err(Error::Input(format!("pair {dup} listed twice")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        pairs
            .par_iter()
            .map(|&pair| match &opts.checkpoint_dir {
                Some(dir) if checkpoint_path(dir, pair).exists() => {
                    resume(Checkpoint::load(&checkpoint_path(dir, pair))?, limit, store, opts)
                }
                _ => sweep_pair(pair, limit, store, opts),
            })
            .collect()
    })
}

/// Continues a checkpointed sweep up to `limit`.
///
/// A checkpoint that already covers `limit` is returned as-is, with its own
/// last completed `n` as threshold.
pub fn resume(checkpoint: Checkpoint, limit: u64, store: &PrimeStore, opts: &SweepOptions) -> Result<PairSummary> {
    let partial = checkpoint.partial;
    if partial.last_n >= limit {
        let covered = partial.last_n;
        return Ok(partial.finalize(covered));
    }
    run_from(partial, limit, store, opts)
}
