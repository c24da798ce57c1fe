//! Leaf-count histograms over all families of `n` distinct shifts.
//!
//! Two exhaustive routes are provided. The brute route visits all `C(p, n)`
//! subsets. The reduced route uses the scaling symmetry `a_i -> u^2 a_i`
//! (which preserves the leaf count) to visit only families whose first shift
//! is `0`, `1` or the canonical non-square `lambda`, with every other shift
//! nonzero; [`aggregate`] then recovers the full histogram exactly:
//!
//! ```text
//! N_k = N_k^0 + (p - 1)(N_k^1 + N_k^lambda) / (2n)
//! ```
//!
//! Enumeration is lexicographic. Work is split by the first free shift, each
//! worker fills a private histogram and the results are summed, so the output
//! does not depend on the number of threads.

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::leaves::{count_leaves, RotationTable, ShiftFamily};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Default kernel-visit budget (families times `p`).
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

/// Families with at least this many leaves share one bucket by default.
pub const DEFAULT_BUCKET: u64 = 40;

/// Samples per independently seeded RNG stream.
pub const SAMPLE_CHUNK: u64 = 1 << 16;

/// Largest rotation table the enumeration kernels will allocate.
const ROTATION_TABLE_BYTES: u64 = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Reduced,
    Sampled,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Reduced => "reduced",
            Method::Sampled => "sampled",
        }
    }

    pub fn is_estimate(self) -> bool {
        self == Method::Sampled
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Method::Brute),
            "reduced" => Ok(Method::Reduced),
            "sampled" => Ok(Method::Sampled),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// `N_k`: how many families have exactly `k` leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafHistogram {
    pub p: u64,
    pub n: usize,
    /// `k -> N_k`. When bucketed, key `T` holds every family with `k >= T`.
    pub counts: BTreeMap<u64, u64>,
    pub bucket: Option<u64>,
    pub total: u64,
    pub method: Method,
}

impl LeafHistogram {
    fn from_dense(p: u64, n: usize, dense: &[u64], method: Method) -> Self {
        let counts: BTreeMap<u64, u64> = dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k as u64, c))
            .collect();
        let total = counts.values().sum();
        LeafHistogram {
            p,
            n,
            counts,
            bucket: None,
            total,
            method,
        }
    }

    /// Merges every `k >= threshold` into one bucket keyed by `threshold`.
    /// Bucketing an already bucketed histogram at a higher threshold is a no-op
    /// for the merged part.
    pub fn bucketed(mut self, threshold: u64) -> Self {
        let tail: u64 = self.counts.split_off(&threshold).values().sum();
        if tail > 0 {
            self.counts.insert(threshold, tail);
        }
        self.bucket = Some(match self.bucket {
            Some(t) => t.min(threshold),
            None => threshold,
        });
        self
    }

    pub fn with_bucket(self, bucket: Option<u64>) -> Self {
        match bucket {
            Some(t) => self.bucketed(t),
            None => self,
        }
    }

    pub fn count(&self, k: u64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Whether key `k` is the merged bucket row.
    pub fn is_bucket_key(&self, k: u64) -> bool {
        self.bucket == Some(k)
    }

    /// Smallest and largest `k` with `N_k > 0`. The maximum of a bucketed
    /// histogram is the bucket threshold when the bucket is occupied.
    pub fn extremes(&self) -> Option<(u64, u64)> {
        let min = *self.counts.keys().next()?;
        let max = *self.counts.keys().next_back()?;
        Some((min, max))
    }
}

/// The three partial histograms of the reduced enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedCensus {
    pub lambda: u64,
    /// `a_1 = 0`.
    pub zero: LeafHistogram,
    /// `a_1 = 1`.
    pub one: LeafHistogram,
    /// `a_1 = lambda`.
    pub nonsquare: LeafHistogram,
}

impl ReducedCensus {
    pub fn families(&self) -> u64 {
        self.zero.total + self.one.total + self.nonsquare.total
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CensusOptions {
    pub bucket: Option<u64>,
    pub budget: u128,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            bucket: Some(DEFAULT_BUCKET),
            budget: DEFAULT_BUDGET,
        }
    }
}

impl CensusOptions {
    pub fn unbucketed() -> Self {
        CensusOptions {
            bucket: None,
            ..Self::default()
        }
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of families visited by the reduced route:
/// `C(p-1, n-1) + 2 C(p-2, n-1)`.
pub fn reduced_family_count(p: u64, n: usize) -> u128 {
    if n == 0 {
        return 0;
    }
    let n = n as u64;
    binomial(p - 1, n - 1) + 2 * binomial(p - 2, n - 1)
}

pub fn brute_cost(p: u64, n: usize) -> u128 {
    binomial(p, n as u64) * p as u128
}

pub fn reduced_cost(p: u64, n: usize) -> u128 {
    reduced_family_count(p, n) * p as u128
}

fn check_size(field: &PrimeField, n: usize) -> Result<()> {
    if n == 0 || n as u64 > field.p() {
        return Err(Error::InvalidArgument(format!(
            "family size {n} must satisfy 1 <= n <= {}",
            field.p()
        )));
    }
    Ok(())
}

fn check_budget(cost: u128, budget: u128, suggestion: &'static str) -> Result<()> {
    if cost > budget {
        return Err(Error::BudgetExceeded {
            estimated: cost,
            budget,
            suggestion,
        });
    }
    Ok(())
}

fn rotation_table(field: &PrimeField) -> Result<RotationTable> {
    if RotationTable::footprint(field.p()) > ROTATION_TABLE_BYTES {
        return Err(Error::InvalidArgument(format!(
            "p = {} is too large for exhaustive enumeration",
            field.p()
        )));
    }
    RotationTable::new(field)
}

/// Visits every `choose`-subset of `cands` (ascending), each OR-ed onto `base`,
/// and tallies zero counts into `hist`. `levels` holds `choose` scratch rows.
fn walk(
    table: &RotationTable,
    cands: &[usize],
    choose: usize,
    base: &[u64],
    levels: &mut [u64],
    hist: &mut [u64],
) {
    let words = table.words();
    if choose == 1 {
        for &a in cands {
            let row = table.row(a);
            let covered: u32 = base.iter().zip(row).map(|(x, y)| (x | y).count_ones()).sum();
            hist[table.p() - covered as usize] += 1;
        }
        return;
    }
    let (here, deeper) = levels.split_at_mut(words);
    for i in 0..=cands.len() - choose {
        table.or_into(base, cands[i], here);
        walk(table, &cands[i + 1..], choose - 1, here, deeper, hist);
    }
}

/// Histogram of the families `prefix ∪ S` over all `choose`-subsets `S` of
/// `cands`, split across workers by the first element of `S`.
fn subset_histogram(
    table: &RotationTable,
    prefix: &[usize],
    cands: &[usize],
    choose: usize,
) -> Vec<u64> {
    let p = table.p();
    let words = table.words();
    let mut base = vec![0u64; words];
    for &a in prefix {
        let src = base.clone();
        table.or_into(&src, a, &mut base);
    }
    if choose == 0 {
        let mut hist = vec![0u64; p + 1];
        hist[table.zeros(&base) as usize] += 1;
        return hist;
    }
    if choose > cands.len() {
        return vec![0u64; p + 1];
    }
    (0..=cands.len() - choose)
        .into_par_iter()
        .fold(
            || (vec![0u64; p + 1], vec![0u64; words * choose]),
            |(mut hist, mut levels), i| {
                let (first, rest) = levels.split_at_mut(words);
                table.or_into(&base, cands[i], first);
                if choose == 1 {
                    hist[table.zeros(first) as usize] += 1;
                } else {
                    walk(table, &cands[i + 1..], choose - 1, first, rest, &mut hist);
                }
                (hist, levels)
            },
        )
        .map(|(hist, _)| hist)
        .reduce(
            || vec![0u64; p + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// All `C(p, n)` families.
pub fn census_brute(field: &PrimeField, n: usize, opts: &CensusOptions) -> Result<LeafHistogram> {
    check_size(field, n)?;
    check_budget(
        brute_cost(field.p(), n),
        opts.budget,
        "use the reduced method or sampling",
    )?;
    let table = rotation_table(field)?;
    let cands: Vec<usize> = (0..field.p() as usize).collect();
    let dense = subset_histogram(&table, &[], &cands, n);
    Ok(LeafHistogram::from_dense(field.p(), n, &dense, Method::Brute).with_bucket(opts.bucket))
}

/// Families with `a_1` in `{0, 1, lambda}` and all other shifts nonzero.
pub fn census_reduced(field: &PrimeField, n: usize, opts: &CensusOptions) -> Result<ReducedCensus> {
    check_size(field, n)?;
    check_budget(
        reduced_cost(field.p(), n),
        opts.budget,
        "use sampling",
    )?;
    let table = rotation_table(field)?;
    let p = field.p();
    let run = |first: u64| {
        let cands: Vec<usize> = (1..p)
            .filter(|&a| a != first)
            .map(|a| a as usize)
            .collect();
        let dense = subset_histogram(&table, &[first as usize], &cands, n - 1);
        LeafHistogram::from_dense(p, n, &dense, Method::Reduced).with_bucket(opts.bucket)
    };
    Ok(ReducedCensus {
        lambda: field.lambda(),
        zero: run(0),
        one: run(1),
        nonsquare: run(field.lambda()),
    })
}

/// Recombines the reduced histograms into the full `N_k`, in exact integer
/// arithmetic. A non-divisible term means a kernel bug.
pub fn aggregate(reduced: &ReducedCensus, p: u64, n: usize) -> Result<LeafHistogram> {
    let parts = [&reduced.zero, &reduced.one, &reduced.nonsquare];
    for h in parts {
        if h.p != p || h.n != n {
            return Err(Error::InvalidArgument(format!(
                "reduced census is for (p={}, n={}), not (p={p}, n={n})",
                h.p, h.n
            )));
        }
    }
    let keys: std::collections::BTreeSet<u64> =
        parts.iter().flat_map(|h| h.counts.keys().copied()).collect();
    let denom = 2 * n as u128;
    let mut counts = BTreeMap::new();
    for k in keys {
        let scaled = (p as u128 - 1) * (reduced.one.count(k) as u128 + reduced.nonsquare.count(k) as u128);
        if !scaled.is_multiple_of(denom) {
            return Err(Error::Inconsistency(format!(
                "(p-1)(N_{k}^1 + N_{k}^lambda) = {scaled} is not divisible by 2n = {denom}"
            )));
        }
        let nk = reduced.zero.count(k) as u128 + scaled / denom;
        if nk > 0 {
            counts.insert(k, u64::try_from(nk).expect("histogram count fits in u64"));
        }
    }
    let total: u64 = counts.values().sum();
    let expected = binomial(p, n as u64);
    if total as u128 != expected {
        return Err(Error::Inconsistency(format!(
            "aggregated total {total} differs from C({p}, {n}) = {expected}"
        )));
    }
    Ok(LeafHistogram {
        p,
        n,
        counts,
        bucket: reduced.zero.bucket,
        total,
        method: Method::Reduced,
    })
}

/// Uniformly sampled families; counts are estimates. Samples are drawn in
/// chunks of [`SAMPLE_CHUNK`], chunk `i` from stream `i` of a ChaCha8 generator
/// seeded with `seed`, so results do not depend on the worker count.
pub fn census_sampled(
    field: &PrimeField,
    n: usize,
    samples: u64,
    seed: u64,
    bucket: Option<u64>,
) -> Result<LeafHistogram> {
    check_size(field, n)?;
    let p = field.p();
    let table = if RotationTable::footprint(p) <= ROTATION_TABLE_BYTES {
        RotationTable::new(field).ok()
    } else {
        None
    };
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = SAMPLE_CHUNK.min(samples - chunk * SAMPLE_CHUNK);
            let mut local = BTreeMap::<u64, u64>::new();
            let mut acc = table.as_ref().map(|t| vec![0u64; t.words()]);
            for _ in 0..count {
                let shifts = sample_distinct(&mut rng, p, n);
                let leaves = match (&table, acc.as_mut()) {
                    (Some(t), Some(acc)) => {
                        acc.fill(0);
                        for &a in &shifts {
                            for (d, r) in acc.iter_mut().zip(t.row(a as usize)) {
                                *d |= r;
                            }
                        }
                        t.zeros(acc)
                    }
                    _ => count_leaves(&ShiftFamily::new(field, shifts)?).get(),
                };
                *local.entry(leaves).or_default() += 1;
            }
            Ok(local)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(BTreeMap::new(), |mut acc, local| {
            for (k, c) in local {
                *acc.entry(k).or_insert(0u64) += c;
            }
            acc
        });
    let total = hist.values().sum();
    Ok(LeafHistogram {
        p,
        n,
        counts: hist,
        bucket: None,
        total,
        method: Method::Sampled,
    }
    .with_bucket(bucket))
}

/// `n` distinct elements of `0..p`, uniformly.
pub(crate) fn sample_distinct(rng: &mut ChaCha8Rng, p: u64, n: usize) -> Vec<u64> {
    use rand::Rng;
    // Rejection on a small vector beats index::sample for the tiny n used here.
    let mut out: Vec<u64> = Vec::with_capacity(n);
    while out.len() < n {
        let x = rng.random_range(0..p);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Minimum and maximum leaf counts over every family of size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extremes {
    pub min: u64,
    pub max: u64,
    pub method: Method,
}

/// Uses the reduced route, which visits roughly `3n/p` of the families.
pub fn min_max_leaves(field: &PrimeField, n: usize, budget: u128) -> Result<Extremes> {
    let opts = CensusOptions {
        bucket: None,
        budget,
    };
    let reduced = census_reduced(field, n, &opts)?;
    // The extremes can be read off the partial histograms directly: every
    // family is a scaled copy of one of them.
    let (min, max) = [&reduced.zero, &reduced.one, &reduced.nonsquare]
        .iter()
        .filter_map(|h| h.extremes())
        .fold((u64::MAX, 0), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
    Ok(Extremes {
        min,
        max,
        method: Method::Reduced,
    })
}

/// One row of a percentage table, rounded half-up to 0.01%.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proportion {
    pub k: u64,
    pub bucket: bool,
    pub hundredths: u64,
}

impl Proportion {
    pub fn percent(&self) -> f64 {
        self.hundredths as f64 / 100.0
    }

    pub fn label(&self) -> String {
        if self.bucket {
            format!(">={}", self.k)
        } else {
            self.k.to_string()
        }
    }
}

impl fmt::Display for Proportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}.{:02}%",
            self.label(),
            self.hundredths / 100,
            self.hundredths % 100
        )
    }
}

pub fn proportions(h: &LeafHistogram) -> Result<Vec<Proportion>> {
    if h.total == 0 {
        return Err(Error::InvalidArgument("empty histogram".into()));
    }
    let total = h.total as u128;
    Ok(h.counts
        .iter()
        .map(|(&k, &c)| Proportion {
            k,
            bucket: h.is_bucket_key(k),
            hundredths: ((c as u128 * 20_000 + total) / (2 * total)) as u64,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::primes_in;
    use crate::leaves::count_leaves_scan;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    /// Independent histogram by scanning every family with the table-free kernel.
    fn scan_histogram(f: &PrimeField, n: usize) -> BTreeMap<u64, u64> {
        fn rec(f: &PrimeField, start: u64, cur: &mut Vec<u64>, n: usize, out: &mut BTreeMap<u64, u64>) {
            if cur.len() == n {
                let l = count_leaves_scan(&ShiftFamily::new(f, cur.iter().copied()).unwrap());
                *out.entry(l.get()).or_default() += 1;
                return;
            }
            for a in start..f.p() {
                cur.push(a);
                rec(f, a + 1, cur, n, out);
                cur.pop();
            }
        }
        let mut out = BTreeMap::new();
        rec(f, 0, &mut Vec::new(), n, &mut out);
        out
    }

    #[test]
    fn brute_examples() {
        let opts = CensusOptions::unbucketed();
        let h = census_brute(&field(5), 2, &opts).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(0, 5), (1, 5)]));
        assert_eq!(h.total, 10);
        let h = census_brute(&field(7), 2, &opts).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(1, 21)]));
        let h = census_brute(&field(7), 1, &opts).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(3, 7)]));
    }

    #[test]
    fn brute_matches_scan_oracle() {
        let opts = CensusOptions::unbucketed();
        for p in primes_in(3, 23) {
            let f = field(p);
            for n in 1..=4.min(p as usize) {
                let h = census_brute(&f, n, &opts).unwrap();
                assert_eq!(h.counts, scan_histogram(&f, n), "p={p} n={n}");
                assert_eq!(h.total as u128, binomial(p, n as u64));
            }
        }
    }

    #[test]
    fn reduced_family_totals() {
        let opts = CensusOptions::unbucketed();
        let r = census_reduced(&field(7), 2, &opts).unwrap();
        assert_eq!((r.zero.total, r.one.total, r.nonsquare.total), (6, 5, 5));
        assert_eq!(r.families(), 16);
        assert_eq!(reduced_family_count(7, 2), 16);
        let r = census_reduced(&field(5), 2, &opts).unwrap();
        assert_eq!(r.zero.total, 4);
    }

    #[test]
    fn reduced_aggregates_to_brute() {
        let opts = CensusOptions::unbucketed();
        for p in primes_in(3, 17) {
            let f = field(p);
            for n in 1..=4.min(p as usize) {
                let r = census_reduced(&f, n, &opts).unwrap();
                assert_eq!(r.families() as u128, reduced_family_count(p, n));
                let agg = aggregate(&r, p, n).unwrap();
                let brute = census_brute(&f, n, &opts).unwrap();
                assert_eq!(agg.counts, brute.counts, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn aggregate_detects_corruption() {
        let opts = CensusOptions::unbucketed();
        let mut r = census_reduced(&field(13), 3, &opts).unwrap();
        let k = *r.one.counts.keys().next().unwrap();
        *r.one.counts.get_mut(&k).unwrap() += 1;
        assert!(matches!(aggregate(&r, 13, 3), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn bucketing_merges_tail() {
        let opts = CensusOptions::unbucketed();
        let h = census_brute(&field(31), 2, &opts).unwrap();
        let b = h.clone().bucketed(7);
        assert_eq!(b.total, h.total);
        assert!(b.counts.keys().all(|&k| k <= 7));
        assert_eq!(b.count(7), h.counts.range(7..).map(|(_, c)| c).sum::<u64>());
    }

    #[test]
    fn budget_refusal() {
        let opts = CensusOptions {
            bucket: None,
            budget: 1000,
        };
        let err = census_brute(&field(101), 3, &opts).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { estimated, .. } if estimated == binomial(101, 3) * 101));
    }

    #[test]
    fn proportions_round_and_sum() {
        let h = census_brute(&field(29), 3, &CensusOptions::default()).unwrap();
        let props = proportions(&h).unwrap();
        let sum: u64 = props.iter().map(|r| r.hundredths).sum();
        assert!((sum as i64 - 10_000).abs() <= 5);
        let bucketed = census_brute(&field(29), 3, &CensusOptions { bucket: Some(3), budget: DEFAULT_BUDGET }).unwrap();
        let last = proportions(&bucketed).unwrap().pop().unwrap();
        assert_eq!(last.label(), ">=3");
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let f = field(31);
        let a = census_sampled(&f, 3, 200_000, 7, None).unwrap();
        let b = census_sampled(&f, 3, 200_000, 7, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total, 200_000);
        let exact = census_brute(&f, 3, &CensusOptions::unbucketed()).unwrap();
        for (&k, &c) in &exact.counts {
            let prob = c as f64 / exact.total as f64;
            let mean = prob * a.total as f64;
            let sd = (a.total as f64 * prob * (1.0 - prob)).sqrt();
            assert!((a.count(k) as f64 - mean).abs() <= 5.0 * sd + 1.0, "k={k}");
        }
    }
}
