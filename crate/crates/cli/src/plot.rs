use crate::failure::Failure;
use crate::svg::{Chart, SHADES};
use crate::{PlotArgs, PlotKind};
use quadgraph::records::{detect_schema, CensusRow, DistRow, Schema, Theoretical};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;

type Res<T = ()> = Result<T, Failure>;

fn read_rows<T: serde::de::DeserializeOwned>(
    args: &PlotArgs,
    want: Schema,
) -> Res<Vec<T>> {
    let open = || File::open(&args.input).map_err(|e| Failure::usage(e).context(args.input.display()));
    let mut rdr = csv::Reader::from_reader(open()?);
    let header = rdr.headers()?.clone();
    match detect_schema(&header) {
        Some(s) if s == want => {}
        found => {
            return Err(Failure::usage(format!(
                "{}: plot kind {:?} needs a {want:?} file, found {}",
                args.input.display(),
                args.kind,
                found.map_or("an unknown schema".to_string(), |s| format!("a {s:?} file"))
            )))
        }
    }
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| Failure::usage(e).context(args.input.display()))
}

/// Census rows grouped by `(n, p)`.
fn blocks(rows: &[CensusRow]) -> BTreeMap<(usize, u64), Vec<&CensusRow>> {
    let mut m: BTreeMap<(usize, u64), Vec<&CensusRow>> = BTreeMap::new();
    for r in rows {
        m.entry((r.n, r.p)).or_default().push(r);
    }
    m
}

fn span(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn minmax(rows: &[CensusRow]) -> Res<String> {
    let mut per_n: BTreeMap<usize, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for ((n, p), rs) in blocks(rows) {
        let ks = rs.iter().filter(|r| r.count > 0).filter_map(|r| r.k_value());
        let (lo, hi) = span(ks.map(|k| k as f64));
        per_n.entry(n).or_default().push((p as f64, lo, hi));
    }
    let xs = span(per_n.values().flatten().map(|t| t.0));
    let ys = span(per_n.values().flatten().flat_map(|t| [t.1, t.2]));
    let mut c = Chart::new("Minimum and maximum number of leaves", "p", "leaves", xs, (0.0f64.min(ys.0), ys.1));
    for (i, (n, pts)) in per_n.iter().enumerate() {
        let shade = SHADES[i % SHADES.len()];
        let lo: Vec<_> = pts.iter().map(|t| (t.0, t.1)).collect();
        let hi: Vec<_> = pts.iter().map(|t| (t.0, t.2)).collect();
        c.polyline(&hi, shade, true, &format!("n={n} max"));
        c.polyline(&lo, shade, false, &format!("n={n} min"));
    }
    Ok(c.render(true))
}

fn lognum(rows: &[CensusRow]) -> Res<String> {
    let ns: Vec<usize> = blocks(rows).keys().map(|k| k.0).collect();
    if ns.windows(2).any(|w| w[0] != w[1]) {
        return Err(Failure::usage("lognum plots one family size; the input mixes several"));
    }
    let mut lines: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    let mut order: Vec<(u64, bool, &str)> = Vec::new();
    for r in rows.iter().filter(|r| r.count > 0) {
        lines
            .entry(r.k.as_str())
            .or_default()
            .push((r.p as f64, (r.count as f64).ln()));
        let key = (r.k_value().unwrap_or(0), r.is_bucket(), r.k.as_str());
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order.sort();
    let xs = span(lines.values().flatten().map(|t| t.0));
    let ys = span(lines.values().flatten().map(|t| t.1));
    let n = ns.first().copied().unwrap_or(0);
    let mut c = Chart::new(
        &format!("Log-number of families by leaf count, n={n}"),
        "p",
        "ln N_k",
        xs,
        (0.0f64.min(ys.0), ys.1),
    );
    for (i, (_, _, k)) in order.iter().enumerate() {
        let mut pts = lines[k].clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        c.polyline(&pts, SHADES[i % SHADES.len()], (i / SHADES.len()) % 2 == 1, &format!("k={k}"));
    }
    Ok(c.render(true))
}

fn stacked(rows: &[CensusRow]) -> Res<String> {
    let groups = blocks(rows);
    let mut c = Chart::new(
        "Proportion of families by leaf count",
        "p (n)",
        "percent",
        (0.0, groups.len() as f64),
        (0.0, 100.0),
    );
    let mut labels: Vec<(u64, bool, String)> = rows
        .iter()
        .map(|r| (r.k_value().unwrap_or(0), r.is_bucket(), r.k.clone()))
        .collect();
    labels.sort();
    labels.dedup();
    let shade_of = |k: &str| {
        let i = labels.iter().position(|l| l.2 == k).unwrap_or(0);
        SHADES[i % SHADES.len()]
    };
    for (i, ((n, p), rs)) in groups.iter().enumerate() {
        let total: u64 = rs.iter().map(|r| r.count).sum();
        if total == 0 {
            continue;
        }
        let mut sorted = rs.clone();
        sorted.sort_by_key(|r| (r.k_value().unwrap_or(0), r.is_bucket()));
        let mut base = 0.0;
        for r in sorted {
            let h = 100.0 * r.count as f64 / total as f64;
            c.rect(i as f64 + 0.15, i as f64 + 0.85, base, base + h, shade_of(&r.k));
            base += h;
        }
        c.x_text(i as f64 + 0.5, &format!("{p} ({n})"));
    }
    for (_, _, k) in &labels {
        c.legend_entry(&format!("k={k}"), shade_of(k));
    }
    Ok(c.render(false))
}

fn hist(rows: &[DistRow]) -> Res<String> {
    let primes: Vec<u64> = {
        let mut v: Vec<u64> = rows.iter().map(|r| r.p).collect();
        v.dedup();
        v
    };
    if primes.len() != 1 {
        return Err(Failure::usage(format!("hist plots one prime; the input has {primes:?}")));
    }
    let p = primes[0];
    let conjectural = rows.iter().any(|r| matches!(r.theoretical, Theoretical::Conjectural(_)));
    let xs = span(rows.iter().flat_map(|r| [r.bin_lo, r.bin_hi]));
    let top = span(rows.iter().flat_map(|r| [r.empirical, r.theoretical.value()])).1;
    let mode = rows.first().map(|r| r.mode.as_str()).unwrap_or("");
    let title = format!(
        "Delta histogram, p={p} ({mode}){}",
        if conjectural { ", limit conjectural" } else { "" }
    );
    let mut c = Chart::new(&title, "Delta", "mass per bin", xs, (0.0, top));
    for r in rows {
        c.rect(r.bin_lo, r.bin_hi, 0.0, r.empirical, SHADES[3]);
    }
    c.legend_entry("empirical", SHADES[3]);
    let curve: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.bin_lo + r.bin_hi) / 2.0, r.theoretical.value()))
        .collect();
    c.polyline(&curve, SHADES[0], conjectural, "semicircle");
    Ok(c.render(true))
}

pub fn plot(args: &PlotArgs) -> Res {
    let svg = match args.kind {
        PlotKind::Minmax => minmax(&read_rows(args, Schema::Census)?)?,
        PlotKind::Lognum => lognum(&read_rows(args, Schema::Census)?)?,
        PlotKind::Stacked => stacked(&read_rows(args, Schema::Census)?)?,
        PlotKind::Hist => hist(&read_rows(args, Schema::Dist)?)?,
    };
    match &args.output {
        Some(path) => std::fs::write(path, svg).map_err(|e| Failure::usage(e).context(path.display()))?,
        None => std::io::stdout().lock().write_all(svg.as_bytes())?,
    }
    Ok(())
}
