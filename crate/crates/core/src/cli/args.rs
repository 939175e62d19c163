use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::partitions::CoeffPair;
use crate::primes::DEFAULT_MEMORY_BUDGET;
use crate::ranking::TiePolicy;

/// Largest `B` in `all:B` accepted without `--allow-large-bound`.
pub const PAIR_BOUND_CAP: u64 = 64;

#[derive(Debug, Parser)]
#[command(name = "ggc", version, about = "Minimal-prime statistics of (m1, m2)-partitions n = m1·p + m2·q")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep every admissible n <= L and write per-pair p* statistics.
    Sweep(SweepArgs),
    /// Rank pairs by average p*, maximum p* and R, and correlate the rankings.
    Rank(RankArgs),
    /// Tabulate R, optionally R'(n) and the g comparator.
    Predict(PredictArgs),
    /// Exhaustively check the residue-class characterisation of partitions.
    VerifyProp(VerifyArgs),
    /// Emit the wide average/maximum table, same-radical groups and g comparisons.
    Report(ReportArgs),
}

#[derive(Debug, Args, Clone)]
pub struct PairArgs {
    /// Pair list ("1,2", "1:2;3:4", "1:2,3:4") or "all:B".
    #[arg(long, default_value = "all:40")]
    pub pairs: String,
    /// Add (1,1) to an "all:B" expansion.
    #[arg(long = "include-1-1")]
    pub include_one_one: bool,
    /// Permit "all:B" with B above 64.
    #[arg(long)]
    pub allow_large_bound: bool,
}

impl PairArgs {
    pub fn resolve(&self) -> Result<Vec<CoeffPair>> {
        parse_pairs(&self.pairs, self.include_one_one, self.allow_large_bound)
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pairs: PairArgs,
    /// Threshold L: an integer, "1e9" or "10^9".
    #[arg(long, value_parser = parse_limit)]
    pub limit: u64,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    /// Prime bitset budget in bytes (suffixes K, M, G).
    #[arg(long, value_parser = parse_bytes, default_value_t = DEFAULT_MEMORY_BUDGET)]
    pub memory_budget: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
    /// Continue from checkpoints found in --checkpoint-dir.
    #[arg(long)]
    pub resume: bool,
    /// Decimal places of the average column.
    #[arg(long, default_value_t = 5)]
    pub precision: u32,
    /// Also record statistics of q in the p-minimal partition.
    #[arg(long)]
    pub include_qstats: bool,
    /// Suppress progress lines on standard error.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Fractional,
    Ordinal,
}

impl From<TieArg> for TiePolicy {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Fractional => TiePolicy::Fractional,
            TieArg::Ordinal => TiePolicy::Ordinal,
        }
    }
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Sweep CSV produced by `sweep`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TieArg::Fractional)]
    pub tie_policy: TieArg,
    /// Keep a (1,1) row in the rankings.
    #[arg(long = "include-1-1")]
    pub include_one_one: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub pairs: PairArgs,
    /// Sweep CSV supplying averages for g.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Require g columns (needs --input).
    #[arg(long)]
    pub with_g: bool,
    /// Also evaluate R'(n) at this n (n <= 10^7).
    #[arg(long, value_parser = parse_limit)]
    pub r_prime_at: Option<u64>,
    #[arg(long, default_value = "predict.csv")]
    pub out: PathBuf,
    /// Decimal places of R and g.
    #[arg(long, default_value_t = 10)]
    pub precision: u32,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Pair list or "all:B".
    #[arg(long, default_value = "all:10")]
    pub pairs: String,
    #[arg(long = "include-1-1")]
    pub include_one_one: bool,
    #[arg(long, value_parser = parse_limit, default_value = "2000")]
    pub n_max: u64,
    /// K = multiplier · ceil(n/m2).
    #[arg(long, default_value_t = 1)]
    pub k_multiplier: u64,
    /// Let the prime range in (d)/(h) include K.
    #[arg(long)]
    pub inclusive_bound: bool,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Largest component in the wide table.
    #[arg(long, default_value_t = 20)]
    pub table_bound: u64,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Integers, `AeB` and `A^B`.
pub fn parse_limit(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim().replace('_', "");
    let bad = || format!("cannot read {s:?} as a threshold (try 1000000, 1e6 or 10^6)");
    let pow = |base: u64, exp: &str| -> std::result::Result<u64, String> {
        let e: u32 = exp.parse().map_err(|_| bad())?;
        base.checked_pow(e).ok_or_else(bad)
    };
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| bad())?;
        m.checked_mul(pow(10, e)?).ok_or_else(bad)
    } else if let Some((b, e)) = s.split_once('^') {
        pow(b.parse().map_err(|_| bad())?, e)
    } else {
        s.parse().map_err(|_| bad())
    }
}

pub fn parse_bytes(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let (digits, mult) = match t.chars().last() {
        Some('K' | 'k') => (&t[..t.len() - 1], 1u64 << 10),
        Some('M' | 'm') => (&t[..t.len() - 1], 1 << 20),
        Some('G' | 'g') => (&t[..t.len() - 1], 1 << 30),
        _ => (t, 1),
    };
    digits
        .parse::<u64>()
        .ok()
        .and_then(|v| v.checked_mul(mult))
        .ok_or_else(|| format!("cannot read {s:?} as a byte count"))
}

pub fn parse_pairs(spec: &str, include_one_one: bool, allow_large: bool) -> Result<Vec<CoeffPair>> {
    let spec = spec.trim();
    if let Some(b) = spec.strip_prefix("all:") {
        let bound: u64 = b
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad bound in pair spec {spec:?}")))?;
        if bound == 0 {
            return Err(Error::Config("pair bound must be positive".into()));
        }
        if bound > PAIR_BOUND_CAP && !allow_large {
            return Err(Error::Config(format!(
                "pair bound {bound} exceeds {PAIR_BOUND_CAP}; pass --allow-large-bound to override"
            )));
        }
        return Ok(CoeffPair::all_up_to(bound, include_one_one));
    }
    let mut out = Vec::new();
    for chunk in spec.split(|c: char| c == ';' || c.is_whitespace()).filter(|c| !c.is_empty()) {
        let tokens: Vec<&str> = if chunk.contains(':') { chunk.split(',').collect() } else { vec![chunk] };
        for t in tokens.into_iter().filter(|t| !t.is_empty()) {
            let p: CoeffPair = t.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            if out.contains(&p) {
                return Err(Error::Config(format!("pair {p} listed twice")));
            }
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("pair spec {spec:?} names no pairs")));
    }
    Ok(out)
}
