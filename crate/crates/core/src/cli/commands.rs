use std::collections::BTreeMap;
use std::path::Path;

use num_rational::Ratio;

use super::args::{PredictArgs, RankArgs, ReportArgs, SweepArgs, VerifyArgs};
use super::csvio::{ensure_dir, read_sweep, write_points, write_rows, write_table, SweepRow};
use crate::arith::radical;
use crate::error::{Error, Result};
use crate::partitions::CoeffPair;
use crate::predictor::{compute_g, compute_r, compute_r_prime, format_rational, rational_to_f64, Rational};
use crate::primes::{PrimeStore, SieveConfig, DEFAULT_SEGMENT_SIZE};
use crate::proposition::{verify_equivalence, Fault, VerifyOptions};
use crate::ranking::{rank_by, spearman_rho, RankTable, TiePolicy, Value};
use crate::sweep::{big_ratio_to_decimal, checkpoint_path, sweep_all, SweepOptions};

/// What a successful command run found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    VerificationFailed,
}

fn decimal(r: &Rational, places: u32) -> String {
    big_ratio_to_decimal(r.numer(), r.denom(), places)
}

fn fmt_rank(r: Ratio<u64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}", *r.numer() as f64 / *r.denom() as f64)
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome> {
    let pairs = a.pairs.resolve()?;
    if a.workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let ckpt_dir = match (&a.checkpoint_dir, a.resume) {
        (None, true) => return Err(Error::Config("--resume needs --checkpoint-dir".into())),
        (None, false) => None,
        (Some(d), resume) => {
            let d = ensure_dir(d)?;
            if !resume {
                if let Some(p) = pairs.iter().find(|&&p| checkpoint_path(&d, p).exists()) {
                    return Err(Error::Config(format!(
                        "checkpoint {} exists; pass --resume or remove it",
                        checkpoint_path(&d, *p).display()
                    )));
                }
            }
            Some(d)
        }
    };
    let store_limit = pairs
        .iter()
        .map(|p| a.limit / p.m1().min(p.m2()))
        .max()
        .unwrap_or(2)
        .max(2);
    let config = SieveConfig {
        segment_size: DEFAULT_SEGMENT_SIZE,
        memory_budget: a.memory_budget,
    };
    let store = PrimeStore::new(store_limit, &config)?;
    let opts = SweepOptions {
        include_qstats: a.include_qstats,
        checkpoint_dir: ckpt_dir,
        progress: !a.quiet,
        ..Default::default()
    };
    let summaries = sweep_all(&pairs, a.limit, &store, a.workers, &opts)?;

    let out = ensure_dir(&a.out)?;
    let rows: Vec<SweepRow> = summaries.iter().map(|s| SweepRow::from_summary(s, a.precision)).collect();
    let sweep_path = out.join("sweep.csv");
    write_rows(&sweep_path, &rows)?;
    let ce: Vec<Vec<String>> = summaries
        .iter()
        .flat_map(|s| s.counterexamples.iter().map(move |n| vec![s.pair.m1().to_string(), s.pair.m2().to_string(), n.to_string()]))
        .collect();
    let ce_path = out.join("counterexamples.csv");
    write_table(&ce_path, &["m1".into(), "m2".into(), "n".into()], &ce)?;
    println!("wrote {} ({} pairs) and {}", sweep_path.display(), rows.len(), ce_path.display());
    Ok(Outcome::Done)
}

struct RankInput {
    pairs: Vec<CoeffPair>,
    avg: Vec<(CoeffPair, Value)>,
    max: Vec<(CoeffPair, Value)>,
    r: Vec<(CoeffPair, Value)>,
    avg_exact: BTreeMap<CoeffPair, Rational>,
}

fn rank_input(rows: &[SweepRow], include_one_one: bool) -> Result<RankInput> {
    let mut inp = RankInput {
        pairs: Vec::new(),
        avg: Vec::new(),
        max: Vec::new(),
        r: Vec::new(),
        avg_exact: BTreeMap::new(),
    };
    for row in rows {
        let pair = row.pair()?;
        if pair.m1() == pair.m2() && !include_one_one {
            continue;
        }
        let avg = row
            .exact_average()?
            .ok_or_else(|| Error::Input(format!("pair {pair} has no partitioned n above its last counterexample")))?;
        inp.pairs.push(pair);
        inp.avg.push((pair, Value::Exact(avg.clone())));
        inp.max.push((pair, Value::Exact(Rational::from_integer(row.max_pmin.into()))));
        inp.r.push((pair, Value::Exact(compute_r(pair))));
        inp.avg_exact.insert(pair, avg);
    }
    if inp.pairs.len() < 2 {
        return Err(Error::Input(format!("ranking needs at least 2 pairs, input has {}", inp.pairs.len())));
    }
    Ok(inp)
}

fn three_rankings(inp: &RankInput, policy: TiePolicy) -> Result<(RankTable, RankTable, RankTable)> {
    Ok((
        rank_by("avg_pmin", inp.avg.clone(), policy)?,
        rank_by("max_pmin", inp.max.clone(), policy)?,
        rank_by("R", inp.r.clone(), policy)?,
    ))
}

pub fn rank(a: &RankArgs) -> Result<Outcome> {
    let rows = read_sweep(&a.input)?;
    let inp = rank_input(&rows, a.include_one_one)?;
    let out = ensure_dir(&a.out)?;
    let policy: TiePolicy = a.tie_policy.into();
    let (avg, max, r) = three_rankings(&inp, policy)?;
    let (ra, rm, rr) = (avg.by_pair(), max.by_pair(), r.by_pair());

    let mut sorted = inp.pairs.clone();
    sorted.sort();
    let header: Vec<String> = ["pair", "avg_rank", "max_rank", "R_rank", "R_value", "R_exact"].map(String::from).to_vec();
    let table: Vec<Vec<String>> = sorted
        .iter()
        .map(|p| {
            let rv = compute_r(*p);
            vec![p.to_string(), fmt_rank(ra[p]), fmt_rank(rm[p]), fmt_rank(rr[p]), decimal(&rv, 10), format_rational(&rv)]
        })
        .collect();
    write_table(&out.join("rankings.csv"), &header, &table)?;

    let mut corr = Vec::new();
    for pol in [TiePolicy::Fractional, TiePolicy::Ordinal] {
        let (avg, max, r) = three_rankings(&inp, pol)?;
        for (x, y, rho) in [
            ("R", "avg_pmin", spearman_rho(&r, &avg)?),
            ("R", "max_pmin", spearman_rho(&r, &max)?),
            ("max_pmin", "avg_pmin", spearman_rho(&max, &avg)?),
        ] {
            println!("rho({x}, {y}) [{pol}] = {rho:.6}");
            corr.push(vec![pol.to_string(), x.to_string(), y.to_string(), format!("{rho:.6}")]);
        }
    }
    let ch: Vec<String> = ["tie_policy", "x", "y", "rho"].map(String::from).to_vec();
    write_table(&out.join("correlations.csv"), &ch, &corr)?;

    let pts = |x: &BTreeMap<CoeffPair, Ratio<u64>>, y: &BTreeMap<CoeffPair, Ratio<u64>>| -> Vec<(String, String)> {
        sorted.iter().map(|p| (fmt_rank(x[p]), fmt_rank(y[p]))).collect()
    };
    write_points(&out.join("fig1a_avg_rank_vs_R_rank.dat"), ("avg_rank", "R_rank"), &pts(&ra, &rr))?;
    write_points(&out.join("fig1b_max_rank_vs_R_rank.dat"), ("max_rank", "R_rank"), &pts(&rm, &rr))?;
    write_points(&out.join("fig1c_avg_rank_vs_max_rank.dat"), ("avg_rank", "max_rank"), &pts(&ra, &rm))?;
    let fig2: Vec<(String, String)> = sorted
        .iter()
        .map(|p| (decimal(&inp.avg_exact[p], 5), decimal(&compute_r(*p), 10)))
        .collect();
    write_points(&out.join("fig2_avg_vs_R.dat"), ("avg_pmin", "R"), &fig2)?;
    println!("ranked {} pairs into {}", sorted.len(), out.display());
    Ok(Outcome::Done)
}

fn averages(path: &Path) -> Result<BTreeMap<CoeffPair, Rational>> {
    let mut m = BTreeMap::new();
    for row in read_sweep(path)? {
        if let Some(avg) = row.exact_average()? {
            m.insert(row.pair()?, avg);
        }
    }
    Ok(m)
}

fn g_of(pair: CoeffPair, avgs: &BTreeMap<CoeffPair, Rational>) -> Result<Option<f64>> {
    avgs.get(&pair).map(|a| compute_g(pair, rational_to_f64(a))).transpose()
}

fn cmp_symbol(a: &Rational, b: &Rational) -> &'static str {
    match a.cmp(b) {
        std::cmp::Ordering::Less => "<",
        std::cmp::Ordering::Equal => "=",
        std::cmp::Ordering::Greater => ">",
    }
}

pub fn predict(a: &PredictArgs) -> Result<Outcome> {
    let pairs = a.pairs.resolve()?;
    if a.with_g && a.input.is_none() {
        return Err(Error::Config("g needs averages: pass --input with a sweep CSV".into()));
    }
    let avgs = a.input.as_deref().map(averages).transpose()?;
    let store = a
        .r_prime_at
        .map(|n| PrimeStore::new(n.max(2), &SieveConfig::default()))
        .transpose()?;

    let mut header: Vec<String> = ["m1", "m2", "R", "R_decimal", "R_vs_swapped"].map(String::from).to_vec();
    if a.r_prime_at.is_some() {
        header.extend(["n", "R_prime", "R_prime_1_1_ratio"].map(String::from));
    }
    if avgs.is_some() {
        header.extend(["avg_pmin", "g", "g_swapped", "predicted_faster"].map(String::from));
    }
    let mut rows = Vec::new();
    for &pair in &pairs {
        let r = compute_r(pair);
        let mut row = vec![
            pair.m1().to_string(),
            pair.m2().to_string(),
            format_rational(&r),
            decimal(&r, a.precision),
            cmp_symbol(&r, &compute_r(pair.swapped())).to_string(),
        ];
        if let (Some(n), Some(store)) = (a.r_prime_at, &store) {
            let rp = compute_r_prime(pair, n, store)?;
            let base = compute_r_prime(CoeffPair::new(1, 1)?, n, store)?;
            let ratio = if rp > 0.0 { format!("{:.*}", a.precision as usize, base / rp) } else { String::new() };
            row.extend([n.to_string(), format!("{rp:.*e}", a.precision as usize), ratio]);
        }
        if let Some(avgs) = &avgs {
            let g = g_of(pair, avgs)?;
            let gs = g_of(pair.swapped(), avgs)?;
            let faster = match (g, gs) {
                (Some(x), Some(y)) if pair.m1() != pair.m2() => {
                    if x < y { pair.to_string() } else { pair.swapped().to_string() }
                }
                _ => String::new(),
            };
            let f = |v: Option<f64>| v.map(|v| format!("{v:.*}", a.precision as usize)).unwrap_or_default();
            row.extend([avgs.get(&pair).map(|v| decimal(v, 5)).unwrap_or_default(), f(g), f(gs), faster]);
            if a.with_g && g.is_none() {
                return Err(Error::Input(format!("no average for pair {pair} in the sweep CSV")));
            }
        }
        rows.push(row);
    }
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_table(&a.out, &header, &rows)?;
    println!("wrote {} ({} pairs)", a.out.display(), rows.len());
    Ok(Outcome::Done)
}

pub fn verify_prop(a: &VerifyArgs) -> Result<Outcome> {
    let pairs = super::args::parse_pairs(&a.pairs, a.include_one_one, false)?;
    let opts = VerifyOptions {
        k_multiplier: a.k_multiplier,
        inclusive_bound: a.inclusive_bound,
        fault: if a.inject_fault { Fault::FlipA } else { Fault::None },
    };
    let reports = pool(a.workers)?.install(|| {
        pairs
            .iter()
            .map(|&p| verify_equivalence(p, a.n_max, &opts))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut bad = 0usize;
    for r in &reports {
        println!("{} n<={} tuples={} violations={}", r.pair, r.n_max, r.tuples_checked, r.violations.len());
        for v in r.violations.iter().take(3) {
            eprintln!("  n={} p={} q={} equation={}", v.n, v.p, v.q, v.equation_holds);
        }
        bad += r.violations.len();
    }
    println!("total violations: {bad}");
    Ok(if bad == 0 { Outcome::Done } else { Outcome::VerificationFailed })
}

pub fn report(a: &ReportArgs) -> Result<Outcome> {
    let rows = read_sweep(&a.input)?;
    let out = ensure_dir(&a.out)?;
    let mut by_pair: BTreeMap<CoeffPair, (Option<Rational>, u64)> = BTreeMap::new();
    for row in &rows {
        by_pair.insert(row.pair()?, (row.exact_average()?, row.max_pmin));
    }
    let cell = |p: CoeffPair, places: u32| -> (String, String) {
        match by_pair.get(&p) {
            Some((Some(avg), max)) => (decimal(avg, places), max.to_string()),
            _ => (String::new(), String::new()),
        }
    };

    // p* of (m1, m2) beside p* of (m2, m1), which is q* of (m1, m2)
    let t2h: Vec<String> = ["m1", "m2", "avg_pstar", "max_pstar", "avg_qstar", "max_qstar"].map(String::from).to_vec();
    let t2: Vec<Vec<String>> = by_pair
        .keys()
        .filter(|p| p.m1() < p.m2() && p.m2() <= a.table_bound)
        .map(|&p| {
            let (pa, pm) = cell(p, 3);
            let (qa, qm) = cell(p.swapped(), 3);
            vec![p.m1().to_string(), p.m2().to_string(), pa, pm, qa, qm]
        })
        .collect();
    write_table(&out.join("table2.csv"), &t2h, &t2)?;

    let mut groups: BTreeMap<(u64, u64), Vec<(u64, Rational)>> = BTreeMap::new();
    for (p, (avg, _)) in &by_pair {
        if let Some(avg) = avg {
            groups.entry((p.m2(), radical(p.m1()))).or_default().push((p.m1(), avg.clone()));
        }
    }
    let t1h: Vec<String> = ["m2", "radical_m1", "m1", "avg_pstar", "group_spread"].map(String::from).to_vec();
    let mut t1 = Vec::new();
    for ((m2, rad), members) in groups.iter().filter(|(_, v)| v.len() > 1) {
        let lo = members.iter().map(|(_, a)| a).min().expect("nonempty group");
        let hi = members.iter().map(|(_, a)| a).max().expect("nonempty group");
        let spread = rational_to_f64(&((hi - lo) / lo));
        for (m1, avg) in members {
            t1.push(vec![m2.to_string(), rad.to_string(), m1.to_string(), decimal(avg, 5), format!("{spread:.6}")]);
        }
    }
    write_table(&out.join("table1.csv"), &t1h, &t1)?;

    let mut avgs = BTreeMap::new();
    for (p, (avg, _)) in &by_pair {
        if let Some(avg) = avg {
            avgs.insert(*p, avg.clone());
        }
    }
    let gh: Vec<String> = ["m1", "m2", "g_forward", "g_backward", "predicted_faster", "R_forward", "R_backward"]
        .map(String::from)
        .to_vec();
    let mut gc = Vec::new();
    for &p in avgs.keys().filter(|p| p.m1() < p.m2()) {
        if let (Some(f), Some(b)) = (g_of(p, &avgs)?, g_of(p.swapped(), &avgs)?) {
            let faster = if f < b { p } else { p.swapped() };
            gc.push(vec![
                p.m1().to_string(),
                p.m2().to_string(),
                format!("{f:.6}"),
                format!("{b:.6}"),
                faster.to_string(),
                format_rational(&compute_r(p)),
                format_rational(&compute_r(p.swapped())),
            ]);
        }
    }
    write_table(&out.join("g_comparisons.csv"), &gh, &gc)?;
    println!(
        "wrote table2.csv ({} rows), table1.csv ({} rows), g_comparisons.csv ({} rows) into {}",
        t2.len(),
        t1.len(),
        gc.len(),
        out.display()
    );
    Ok(Outcome::Done)
}
