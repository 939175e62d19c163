//! Acceptance criteria, one PASS / FAIL line each.
//!
//! Criteria 5 and 6 need sweeps to 10^9. Criterion 5 (three pairs) runs
//! here. Criterion 6 (978 pairs, hours on one core) reads a `ggc sweep`
//! CSV: `GGC_ACCEPT_SWEEP_CSV` if set, else `tests/data/sweep_all40_1e9.csv`,
//! whose rows for the criterion 5 pairs must equal the fresh sweep.
//! `GGC_ACCEPT_SLOW=1` recomputes all 978 pairs instead.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigUint;

use ggc_core::arith::radical;
use ggc_core::cli::read_sweep;
use ggc_core::partitions::{find_p_minimal, find_p_minimal_bruteforce, find_q_maximal_descending, is_admissible};
use ggc_core::predictor::{compute_n_estimate, compute_r, rational_to_f64, Rational};
use ggc_core::primes::{Backing, SieveConfig};
use ggc_core::proposition::{verify_equivalence, VerifyOptions};
use ggc_core::ranking::{rank_by, spearman_rho, TiePolicy, Value};
use ggc_core::sweep::{sweep_all, PairSummary, SweepOptions};
use ggc_core::{CoeffPair, PrimeStore};

enum Verdict {
    Pass(String),
    Fail(String),
}

fn pair(a: u64, b: u64) -> CoeffPair {
    CoeffPair::new(a, b).unwrap()
}

fn store(limit: u64) -> PrimeStore {
    let cfg = SieveConfig {
        memory_budget: 1 << 30,
        ..SieveConfig::default()
    };
    PrimeStore::with_backing(limit, Backing::BitsetSieve, &cfg).unwrap()
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn is_prime_td(v: u64) -> bool {
    v >= 2 && (2..).take_while(|d| d * d <= v).all(|d| !v.is_multiple_of(d))
}

fn exact_avg(s: &PairSummary) -> Rational {
    Rational::new(BigUint::from(s.sum_pmin), BigUint::from(s.count_n))
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn c1_oracle_equivalence() -> Verdict {
    let s = store(10_000);
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for p in CoeffPair::all_up_to(12, true) {
        for n in (1..=10_000u64).filter(|&n| is_admissible(p, n)) {
            let fast = find_p_minimal(&s, p, n).unwrap();
            let slow = find_p_minimal_bruteforce(p, n).unwrap();
            let desc = find_q_maximal_descending(&s, p, n).unwrap();
            checked += 1;
            if fast != slow || fast != desc {
                bad.push((p, n));
            }
        }
    }
    check(bad.is_empty(), format!("{checked} (pair, n) checks, {} discrepancies {:?}", bad.len(), &bad[..bad.len().min(3)]))
}

/// Smallest prime q with `n = a·p + b·q` for some prime p, by scanning every q.
fn min_q_unfiltered(a: u64, b: u64, n: u64) -> Option<u64> {
    (2..)
        .take_while(|q| b * q < n)
        .filter(|&q| is_prime_td(q))
        .find(|&q| {
            let rest = n - b * q;
            rest.is_multiple_of(a) && is_prime_td(rest / a)
        })
}

fn c2_symmetry() -> Verdict {
    let s = store(100_000);
    let mut bad = Vec::new();
    let mut checked = 0u64;
    for (a, b) in [(1, 2), (2, 1), (3, 5), (5, 3), (4, 9), (9, 4)] {
        let p = pair(a, b);
        for n in 1..=100_000u64 {
            if is_admissible(p, n) != is_admissible(p.swapped(), n) {
                bad.push((p, n));
                continue;
            }
            if !is_admissible(p, n) {
                continue;
            }
            checked += 1;
            // q* of (b, a): least q in n = b·p' + a·q
            if find_p_minimal(&s, p, n).unwrap().p_min() != min_q_unfiltered(b, a, n) {
                bad.push((p, n));
            }
        }
    }
    check(bad.is_empty(), format!("{checked} admissible n, {} discrepancies {:?}", bad.len(), &bad[..bad.len().min(3)]))
}

fn c3_proposition() -> Verdict {
    let pairs = CoeffPair::all_up_to(10, true);
    let base = VerifyOptions::default();
    let doubled = VerifyOptions {
        k_multiplier: 2,
        ..VerifyOptions::default()
    };
    let mut violations = 0usize;
    let mut mismatched = 0usize;
    let mut tuples = 0u64;
    for &p in &pairs {
        let r1 = verify_equivalence(p, 2000, &base).unwrap();
        let r2 = verify_equivalence(p, 2000, &doubled).unwrap();
        violations += r1.violations.len() + r2.violations.len();
        if r1.violations != r2.violations || r1.tuples_checked != r2.tuples_checked {
            mismatched += 1;
        }
        tuples += r1.tuples_checked;
    }
    check(
        violations == 0 && mismatched == 0,
        format!("{} pairs, {tuples} tuples, {violations} violations, {mismatched} pairs sensitive to doubling K", pairs.len()),
    )
}

fn c4_r_laws() -> Verdict {
    let pairs = CoeffPair::all_up_to(40, true);
    let mut bad = Vec::new();
    let mut groups: BTreeMap<(u64, u64), Vec<Rational>> = BTreeMap::new();
    for &p in &pairs {
        let lhs = compute_r(p) * BigUint::from(p.m1());
        let rhs = compute_r(p.swapped()) * BigUint::from(p.m2());
        if lhs != rhs || (p.m1() < p.m2() && compute_r(p.swapped()) >= compute_r(p)) {
            bad.push(p);
        }
        groups.entry((radical(p.m1()), p.m2())).or_default().push(compute_r(p));
    }
    let radical_ok = groups.values().all(|v| v.iter().all(|r| r == &v[0]));
    let q = |a: u32, b: u32| Rational::new(BigUint::from(a), BigUint::from(b));
    let spots = compute_r(pair(1, 1)) == q(1, 1) && compute_r(pair(2, 3)) == q(3, 2) && compute_r(pair(12, 35)) == q(175, 16);
    check(
        bad.is_empty() && radical_ok && spots,
        format!("{} pairs, ratio-law failures {:?}, radical invariance {radical_ok}, spot values {spots}", pairs.len(), bad),
    )
}

fn sweep_1e9_three() -> Vec<PairSummary> {
    let limit = 1_000_000_000u64;
    let s = store(limit);
    let pairs = [pair(1, 2), pair(2, 1), pair(8, 19)];
    sweep_all(&pairs, limit, &s, workers(), &SweepOptions::default()).unwrap()
}

fn c5_tables(res: &[PairSummary]) -> Verdict {
    let a12 = rational_to_f64(&exact_avg(&res[0]));
    let a21 = rational_to_f64(&exact_avg(&res[1]));
    let ok = (a12 - 80.839).abs() <= 0.001
        && res[0].max_pmin == 3037
        && (a21 - 32.80032).abs() <= 0.00001
        && res[1].max_pmin == 1609
        && res[2].max_pmin == 42727;
    check(
        ok,
        format!(
            "(1,2) avg {a12:.5} max {}; (2,1) avg {a21:.6} max {}; (8,19) max {}",
            res[0].max_pmin, res[1].max_pmin, res[2].max_pmin
        ),
    )
}

struct Table {
    avg: Vec<(CoeffPair, Value)>,
    max: Vec<(CoeffPair, Value)>,
    r: Vec<(CoeffPair, Value)>,
}

fn table_of(rows: impl Iterator<Item = (CoeffPair, Rational, u64)>) -> Table {
    let mut t = Table {
        avg: Vec::new(),
        max: Vec::new(),
        r: Vec::new(),
    };
    for (p, avg, max) in rows.filter(|(p, _, _)| p.m1() != p.m2()) {
        t.avg.push((p, Value::Exact(avg)));
        t.max.push((p, Value::Exact(Rational::from_integer(BigUint::from(max)))));
        t.r.push((p, Value::Exact(compute_r(p))));
    }
    t
}

fn rhos(t: &Table, policy: TiePolicy) -> (f64, f64) {
    let avg = rank_by("avg", t.avg.clone(), policy).unwrap();
    let max = rank_by("max", t.max.clone(), policy).unwrap();
    let r = rank_by("R", t.r.clone(), policy).unwrap();
    (spearman_rho(&r, &avg).unwrap(), spearman_rho(&r, &max).unwrap())
}

fn c6_correlation(fresh: &[PairSummary]) -> Verdict {
    let limit = 1_000_000_000u64;
    let (table, source) = if std::env::var("GGC_ACCEPT_SLOW").as_deref() == Ok("1") {
        let s = store(limit);
        let pairs = CoeffPair::all_up_to(40, false);
        let res = sweep_all(&pairs, limit, &s, workers(), &SweepOptions::default()).unwrap();
        (table_of(res.iter().map(|s| (s.pair, exact_avg(s), s.max_pmin))), "fresh sweep".to_string())
    } else {
        let path = std::env::var("GGC_ACCEPT_SWEEP_CSV")
            .map(PathBuf::from)
            .unwrap_or_else(|_| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sweep_all40_1e9.csv"));
        let rows = match read_sweep(&path) {
            Ok(rows) => rows,
            Err(e) => return Verdict::Fail(format!("{}: {e}", path.display())),
        };
        if rows.iter().any(|r| r.limit != limit) {
            return Verdict::Fail(format!("{} is not a sweep to 10^9", path.display()));
        }
        for s in fresh {
            let same = rows.iter().any(|r| {
                r.pair().ok() == Some(s.pair)
                    && r.k_hat == s.k_hat
                    && r.count_n == s.count_n
                    && r.sum_pmin == s.sum_pmin.to_string()
                    && (r.max_pmin, r.max_at) == (s.max_pmin, s.max_pmin_at)
            });
            if !same {
                return Verdict::Fail(format!("{}: row for {} differs from a fresh sweep", path.display(), s.pair));
            }
        }
        let table = table_of(rows.into_iter().map(|r| (r.pair().unwrap(), r.exact_average().unwrap().unwrap(), r.max_pmin)));
        (table, path.file_name().unwrap().to_string_lossy().into_owned())
    };
    let (fa, fm) = rhos(&table, TiePolicy::Fractional);
    let (oa, om) = rhos(&table, TiePolicy::Ordinal);
    let within = |v: f64, t: f64| (v - t).abs() <= 0.0005;
    check(
        table.avg.len() == 978 && within(fa, 0.9949) && within(fm, 0.9958) && within(oa, 0.9949) && within(om, 0.9958),
        format!("{source}, {} pairs; fractional rho(R,avg) {fa:.4} rho(R,max) {fm:.4}; ordinal {oa:.4} {om:.4}", table.avg.len()),
    )
}

fn sweep_1e7() -> Vec<PairSummary> {
    let limit = 10_000_000u64;
    let s = store(limit);
    sweep_all(&CoeffPair::all_up_to(40, false), limit, &s, workers(), &SweepOptions::default()).unwrap()
}

fn c7_scaled_correlation(res: &[PairSummary]) -> Verdict {
    let table = table_of(res.iter().map(|s| (s.pair, exact_avg(s), s.max_pmin)));
    let (rho, _) = rhos(&table, TiePolicy::Fractional);
    let avg: BTreeMap<CoeffPair, Rational> = res.iter().map(|s| (s.pair, exact_avg(s))).collect();
    let bad: Vec<CoeffPair> = avg
        .keys()
        .filter(|p| p.m1() < p.m2() && p.m2() <= 12)
        .filter(|p| avg[&p.swapped()] >= avg[p])
        .copied()
        .collect();
    check(rho >= 0.95 && bad.is_empty(), format!("rho(R,avg) {rho:.4} over {} pairs, order violations {bad:?}", table.avg.len()))
}

fn c8_radical_groups(res: &[PairSummary]) -> Verdict {
    let mut groups: BTreeMap<(u64, u64), Vec<(u64, f64)>> = BTreeMap::new();
    for s in res.iter().filter(|s| s.pair.m1() <= 20 && s.pair.m2() <= 10) {
        groups
            .entry((s.pair.m2(), radical(s.pair.m1())))
            .or_default()
            .push((s.pair.m1(), rational_to_f64(&exact_avg(s))));
    }
    let mut worst = (0.0f64, 0u64, 0u64, 0u64);
    let mut n_groups = 0;
    for ((m2, _), members) in groups.iter().filter(|(_, v)| v.len() > 1) {
        n_groups += 1;
        for &(a, va) in members {
            for &(b, vb) in members {
                let d = (va - vb).abs() / va;
                if d > worst.0 {
                    worst = (d, a, b, *m2);
                }
            }
        }
    }
    check(
        worst.0 <= 0.02,
        format!("{n_groups} groups, worst relative gap {:.4} between m1 = {} and {} at m2 = {}", worst.0, worst.1, worst.2, worst.3),
    )
}

fn run_sweep_cli(workers: usize, out: &Path) -> (Vec<u8>, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_ggc"))
        .args(["sweep", "--pairs", "all:40", "--limit", "1e6", "--quiet", "--workers"])
        .arg(workers.to_string())
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success());
    (std::fs::read(out.join("sweep.csv")).unwrap(), std::fs::read(out.join("counterexamples.csv")).unwrap())
}

fn c9_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let one: PathBuf = dir.path().join("w1");
    let eight: PathBuf = dir.path().join("w8");
    let a = run_sweep_cli(1, &one);
    let b = run_sweep_cli(8, &eight);
    check(a == b, format!("sweep.csv {} bytes, identical {}; sidecar identical {}", a.0.len(), a.0 == b.0, a.1 == b.1))
}

fn c10_partition_count() -> Verdict {
    let p = pair(1, 1);
    let mut details = Vec::new();
    let mut ok = true;
    for n in [1_000u64, 10_000] {
        // ordered representations n = p + q
        let count = (2..n - 1).filter(|&a| is_prime_td(a) && is_prime_td(n - a)).count() as f64;
        let est = compute_n_estimate(p, n).unwrap();
        let ratio = count / est;
        ok &= (0.5..=2.0).contains(&ratio);
        details.push(format!("n={n}: count {count} estimate {est:.1} ratio {ratio:.3}"));
    }
    check(ok, details.join("; "))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {id:>2} {name}: {detail} ({secs:.1}s)");
    };
    report(1, "oracle equivalence", &mut c1_oracle_equivalence);
    report(2, "symmetry", &mut c2_symmetry);
    report(3, "residue-class characterisation", &mut c3_proposition);
    report(4, "exact R laws", &mut c4_r_laws);
    let three = std::cell::OnceCell::new();
    report(5, "10^9 table values", &mut || c5_tables(three.get_or_init(sweep_1e9_three)));
    report(6, "10^9 rank correlations", &mut || c6_correlation(three.get_or_init(sweep_1e9_three)));
    let res = std::cell::OnceCell::new();
    report(7, "10^7 correlation and order", &mut || c7_scaled_correlation(res.get_or_init(sweep_1e7)));
    report(8, "10^7 same-radical groups", &mut || c8_radical_groups(res.get_or_init(sweep_1e7)));
    report(9, "worker-count determinism", &mut c9_determinism);
    report(10, "partition count estimate", &mut c10_partition_count);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
