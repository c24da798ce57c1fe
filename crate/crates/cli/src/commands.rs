use crate::failure::Failure;
use crate::{
    CensusArgs, CoverArgs, DistArgs, FieldInfoArgs, Format, LeavesArgs, MethodArg, OutputArgs,
    PrimeSelection, SuiteArg, VerifyArgs,
};
use quadgraph::census::{
    aggregate, brute_cost, census_brute, census_reduced, census_sampled, proportions,
    reduced_cost, CensusOptions, LeafHistogram,
};
use quadgraph::cover::{ceil_log2, general_threshold, greedy_leafless, max_guaranteed_n, mod4_threshold};
use quadgraph::dist::{sup_cdf_deviation, DeltaCensus, DeltaHistogram, DEFAULT_RANGE};
use quadgraph::field::{is_prime, primes_in};
use quadgraph::leaves::{count_leaves_bitset, count_leaves_scan, ShiftFamily};
use quadgraph::records::{
    census_rows, cover_row, cover_threshold_row, dist_rows, write_csv_with_header, CensusRow,
    CENSUS_HEADER, COVER_HEADER, COVER_THRESHOLD_HEADER, DIST_HEADER,
};
use quadgraph::verify::{run_suite, Suite};
use quadgraph::{Error, PrimeField};
use serde::Serialize;
use serde_json::json;
use std::fs::File;
use std::io::{self, BufWriter, Write};

type Res<T = ()> = Result<T, Failure>;

fn note(msg: impl std::fmt::Display) {
    eprintln!("# {msg}");
}

fn sink(path: Option<&std::path::Path>) -> Res<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::usage(e).context(p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(out: &OutputArgs, value: &T) -> Res {
    let mut w = sink(out.output.as_deref())?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_csv<T: Serialize>(out: &OutputArgs, header: &[&str], rows: &[T]) -> Res {
    let mut w = sink(out.output.as_deref())?;
    write_csv_with_header(&mut w, header, rows)?;
    w.flush()?;
    Ok(())
}

/// Primes selected by `--p` or `--pmin/--pmax`. Composite range endpoints
/// are skipped with a note.
fn selected_primes(sel: &PrimeSelection) -> Res<Vec<u64>> {
    if let Some(p) = sel.p {
        PrimeField::new(p)?;
        return Ok(vec![p]);
    }
    let hi = sel.pmax.expect("clap requires --p or --pmax");
    let lo = sel.pmin.unwrap_or(3);
    if lo < 3 || hi < 3 {
        return Err(Failure::usage("range endpoints must be at least 3"));
    }
    if lo > hi {
        return Err(Failure::usage(format!("empty range: --pmin {lo} > --pmax {hi}")));
    }
    for end in [lo, hi] {
        if !is_prime(end) {
            note(format!("{end} is not prime; skipped"));
        }
    }
    let primes: Vec<u64> = primes_in(lo, hi).collect();
    if primes.is_empty() {
        return Err(Failure::usage(format!("no primes in {lo}..={hi}")));
    }
    Ok(primes)
}

pub fn leaves(a: &LeavesArgs) -> Res {
    let f = PrimeField::new(a.p)?;
    let fam = ShiftFamily::new(&f, a.shifts.iter().copied())?;
    let (count, method) = match count_leaves_bitset(&fam) {
        Ok(c) => (c, "bitset"),
        Err(Error::TableUnavailable { .. }) => (count_leaves_scan(&fam), "scan"),
        Err(e) => return Err(e.into()),
    };
    if a.verify {
        let scan = count_leaves_scan(&fam);
        if scan != count {
            return Err(Failure::property(format!(
                "{method} kernel counts {count} leaves, scan counts {scan}"
            )));
        }
    }
    let out = LeavesReport {
        p: a.p,
        shifts: fam.shifts(),
        leaf_count: count.get(),
        method: if a.verify && method == "bitset" { "bitset+scan" } else { method },
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

#[derive(Serialize)]
struct LeavesReport<'a> {
    p: u64,
    shifts: &'a [u64],
    leaf_count: u64,
    method: &'a str,
}

#[derive(Serialize)]
struct CensusBlock {
    p: u64,
    n: usize,
    method: quadgraph::census::Method,
    estimate: bool,
    total: u64,
    bucket: Option<u64>,
    seed: Option<u64>,
    min: Option<u64>,
    max: Option<u64>,
    max_is_bucket: bool,
    proportions: Vec<ProportionOut>,
    rows: Vec<CensusRow>,
}

#[derive(Serialize)]
struct ProportionOut {
    k: String,
    percent: f64,
}

fn census_block(h: &LeafHistogram, seed: Option<u64>) -> Res<CensusBlock> {
    let ext = h.extremes();
    let props = proportions(h)?;
    let line: Vec<String> = props.iter().map(|x| x.to_string()).collect();
    let max_is_bucket = ext.is_some_and(|(_, hi)| h.is_bucket_key(hi));
    let est = if h.method.is_estimate() {
        format!(" estimate samples={} seed={}", h.total, seed.unwrap_or_default())
    } else {
        String::new()
    };
    match ext {
        Some((lo, hi)) => note(format!(
            "p={} n={} method={}{est} total={} min={lo} max={}{hi}",
            h.p,
            h.n,
            h.method,
            h.total,
            if max_is_bucket { ">=" } else { "" }
        )),
        None => note(format!("p={} n={} method={} total=0", h.p, h.n, h.method)),
    }
    note(format!("proportions: {}", line.join(", ")));
    Ok(CensusBlock {
        p: h.p,
        n: h.n,
        method: h.method,
        estimate: h.method.is_estimate(),
        total: h.total,
        bucket: h.bucket,
        seed,
        min: ext.map(|e| e.0),
        max: ext.map(|e| e.1),
        max_is_bucket,
        proportions: props
            .iter()
            .map(|x| ProportionOut {
                k: x.label(),
                percent: x.percent(),
            })
            .collect(),
        rows: census_rows(h),
    })
}

fn census_one(f: &PrimeField, a: &CensusArgs, budget: u128) -> Res<Vec<CensusBlock>> {
    let p = f.p();
    let bucket = (!a.no_bucket).then_some(a.bucket);
    if let Some(samples) = a.sample {
        let h = census_sampled(f, a.n, samples, a.seed, bucket)?;
        return Ok(vec![census_block(&h, Some(a.seed))?]);
    }
    let opts = CensusOptions { bucket, budget };
    let reduced = || -> Res<LeafHistogram> { Ok(aggregate(&census_reduced(f, a.n, &opts)?, p, a.n)?) };
    let with_hint = |e: Error| match e {
        Error::BudgetExceeded { .. } => Failure::usage(format!("{e} (pass --sample N)")),
        e => e.into(),
    };
    let hists = match a.method {
        MethodArg::Brute => vec![census_brute(f, a.n, &opts).map_err(with_hint)?],
        MethodArg::Reduced => vec![reduced()?],
        MethodArg::Auto => {
            if brute_cost(p, a.n) <= budget {
                vec![census_brute(f, a.n, &opts)?]
            } else if reduced_cost(p, a.n) <= budget {
                vec![reduced()?]
            } else {
                return Err(with_hint(Error::BudgetExceeded {
                    estimated: reduced_cost(p, a.n),
                    budget,
                    suggestion: "even the reduced enumeration is too large",
                }));
            }
        }
        MethodArg::Both => {
            let brute = census_brute(f, a.n, &opts).map_err(with_hint)?;
            let red = reduced()?;
            if brute.counts != red.counts || brute.total != red.total {
                return Err(Failure::property(format!(
                    "p={p} n={}: brute {:?} differs from reduced {:?}",
                    a.n, brute.counts, red.counts
                )));
            }
            note(format!("p={p} n={}: brute and reduced histograms agree", a.n));
            vec![brute, red]
        }
    };
    hists.iter().map(|h| census_block(h, None)).collect()
}

pub fn census(a: &CensusArgs, budget: u128) -> Res {
    if a.n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let mut blocks = Vec::new();
    for p in selected_primes(&a.primes)? {
        if a.n as u64 > p {
            note(format!("p={p} has fewer than {} elements; skipped", a.n));
            continue;
        }
        let f = PrimeField::new(p)?;
        blocks.extend(census_one(&f, a, budget).map_err(|e| e.context(format!("p={p}")))?);
    }
    match a.out.format {
        Format::Json => emit_json(&a.out, &blocks),
        Format::Csv => {
            let rows: Vec<CensusRow> = blocks.into_iter().flat_map(|b| b.rows).collect();
            emit_csv(&a.out, CENSUS_HEADER, &rows)
        }
    }
}

pub fn cover(a: &CoverArgs) -> Res {
    let mut reports = Vec::new();
    for p in selected_primes(&a.primes)? {
        let r = greedy_leafless(&PrimeField::new(p)?)?;
        if !r.leafless {
            return Err(Failure::property(format!("p={p}: greedy family {:?} has a leaf", r.shifts)));
        }
        reports.push(r);
    }
    if let Some(r) = reports.iter().max_by_key(|r| (r.n(), std::cmp::Reverse(r.p))) {
        note(format!("largest greedy family: n={} at p={}", r.n(), r.p));
    }
    match (a.check_thresholds, a.out.format) {
        (false, Format::Csv) => {
            let rows: Vec<_> = reports.iter().map(cover_row).collect();
            emit_csv(&a.out, COVER_HEADER, &rows)
        }
        (true, Format::Csv) => {
            let rows: Vec<_> = reports.iter().map(cover_threshold_row).collect();
            emit_csv(&a.out, COVER_THRESHOLD_HEADER, &rows)
        }
        (false, Format::Json) => emit_json(&a.out, &reports.iter().map(cover_row).collect::<Vec<_>>()),
        (true, Format::Json) => {
            emit_json(&a.out, &reports.iter().map(cover_threshold_row).collect::<Vec<_>>())
        }
    }
}

pub fn dist(a: &DistArgs, budget: u128) -> Res {
    let f = PrimeField::new(a.p)?;
    let census = match a.sample {
        Some(samples) => DeltaCensus::sampled(&f, samples, a.seed)?,
        None => DeltaCensus::exhaustive(&f, budget).map_err(|e| match e {
            Error::BudgetExceeded { .. } => Failure::usage(format!("{e} (pass --sample N)")),
            e => e.into(),
        })?,
    };
    let h = DeltaHistogram::from_census(&census, DEFAULT_RANGE, a.bins as usize)?;
    let dev = sup_cdf_deviation(&h);
    note(format!(
        "p={} mode={}{} samples={} sup_cdf_deviation={:.6}{}",
        h.p,
        h.mode.name(),
        a.sample.map(|_| format!(" seed={}", a.seed)).unwrap_or_default(),
        h.samples,
        dev,
        if h.conjectural { " theoretical=conjectural" } else { "" }
    ));
    let rows = dist_rows(&h);
    match a.out.format {
        Format::Csv => emit_csv(&a.out, DIST_HEADER, &rows),
        Format::Json => emit_json(
            &a.out,
            &json!({
                "p": h.p,
                "mode": h.mode.name(),
                "seed": a.sample.map(|_| a.seed),
                "samples": h.samples,
                "conjectural": h.conjectural,
                "sup_cdf_deviation": dev,
                "rows": rows,
            }),
        ),
    }
}

pub fn verify(a: &VerifyArgs) -> Res {
    if a.pmax < 3 {
        return Err(Failure::usage("--pmax must be at least 3"));
    }
    let suites: Vec<Suite> = match a.suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::ClosedForms => vec![Suite::ClosedForms],
        SuiteArg::Bounds => vec![Suite::Bounds],
        SuiteArg::Orbit => vec![Suite::Orbit],
        SuiteArg::Covers => vec![Suite::Covers],
        SuiteArg::Dist => vec![Suite::Dist],
    };
    let mut reports = Vec::new();
    let mut passed = true;
    for s in suites {
        let r = run_suite(s, a.pmax)?;
        note(format!(
            "{}: {} checks, {} skipped, {} failures",
            s,
            r.checks,
            r.skipped,
            r.failures.len()
        ));
        passed &= r.passed();
        reports.push(json!({
            "suite": s.name(),
            "checks": r.checks,
            "skipped": r.skipped,
            "failures": r.failures,
        }));
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "pmax": a.pmax, "passed": passed, "suites": reports }))?
    );
    if passed {
        Ok(())
    } else {
        Err(Failure::property("verification failed"))
    }
}

pub fn field_info(a: &FieldInfoArgs) -> Res {
    let f = PrimeField::new(a.p)?;
    let p = f.p();
    let out = json!({
        "p": p,
        "p_mod_4": p % 4,
        "lambda": f.lambda(),
        "chi_minus_one": f.chi(p - 1).value(),
        "squares": p.div_ceil(2),
        "residue_table": f.has_table(),
        "log2_ceiling": ceil_log2(p),
        "guarantee_n": max_guaranteed_n(p, general_threshold),
        "guarantee_n_mod4": max_guaranteed_n(p, mod4_threshold),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
