//! Flat-file schemas for census, cover and distribution output.
//!
//! Real-valued columns carry 12 significant digits. Values are quantized when
//! a row is built, so writing a row and reading it back yields the same row.

use crate::census::{LeafHistogram, Method};
use crate::cover::{ceil_log2, general_threshold, max_guaranteed_n, mod4_threshold, CoverReport};
use crate::dist::{DeltaHistogram, SampleMode};
use serde::de::{self, DeserializeOwned, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::io::{Read, Write};

pub const CENSUS_HEADER: &[&str] = &["p", "n", "k", "count", "total", "method", "bucket"];
pub const COVER_HEADER: &[&str] = &["p", "n", "shifts", "leafless", "log2_ceiling"];
pub const COVER_THRESHOLD_HEADER: &[&str] = &[
    "p",
    "n",
    "shifts",
    "leafless",
    "log2_ceiling",
    "guarantee_n",
    "guarantee_n_mod4",
];
pub const DIST_HEADER: &[&str] = &[
    "p",
    "bin_lo",
    "bin_hi",
    "empirical",
    "theoretical",
    "mode",
    "seed",
    "samples",
];

/// `x` rendered with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.11e}")
}

/// Nearest double to `x` rounded to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    format_sig12(x).parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub p: u64,
    pub n: usize,
    /// Leaf count, or `>=T` for the bucket row.
    pub k: String,
    pub count: u64,
    pub total: u64,
    pub method: Method,
    pub bucket: Option<u64>,
}

impl CensusRow {
    /// Lower end of the row's leaf range.
    pub fn k_value(&self) -> Option<u64> {
        self.k.trim_start_matches(">=").parse().ok()
    }

    pub fn is_bucket(&self) -> bool {
        self.k.starts_with(">=")
    }
}

pub fn census_rows(h: &LeafHistogram) -> Vec<CensusRow> {
    h.counts
        .iter()
        .map(|(&k, &count)| CensusRow {
            p: h.p,
            n: h.n,
            k: if h.is_bucket_key(k) {
                format!(">={k}")
            } else {
                k.to_string()
            },
            count,
            total: h.total,
            method: h.method,
            bucket: h.bucket,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverRow {
    pub p: u64,
    pub n: usize,
    /// Semicolon-joined, in construction order.
    pub shifts: String,
    pub leafless: bool,
    pub log2_ceiling: u32,
}

/// Cover row with the largest family sizes that are guaranteed to have a leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverThresholdRow {
    pub p: u64,
    pub n: usize,
    pub shifts: String,
    pub leafless: bool,
    pub log2_ceiling: u32,
    /// Largest `n` with `n^2 2^{4n-4} < p`.
    pub guarantee_n: u64,
    /// Largest `n` with `n^2 2^{2n-2} < p` when `p = 3 (mod 4)`, else 0.
    pub guarantee_n_mod4: u64,
}

pub fn join_shifts(shifts: &[u64]) -> String {
    shifts
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_shifts(s: &str) -> Result<Vec<u64>, std::num::ParseIntError> {
    s.split(';').map(|x| x.trim().parse()).collect()
}

pub fn cover_row(r: &CoverReport) -> CoverRow {
    CoverRow {
        p: r.p,
        n: r.n(),
        shifts: join_shifts(&r.shifts),
        leafless: r.leafless,
        log2_ceiling: ceil_log2(r.p),
    }
}

pub fn cover_threshold_row(r: &CoverReport) -> CoverThresholdRow {
    let base = cover_row(r);
    CoverThresholdRow {
        p: base.p,
        n: base.n,
        shifts: base.shifts,
        leafless: base.leafless,
        log2_ceiling: base.log2_ceiling,
        guarantee_n: max_guaranteed_n(r.p, general_threshold),
        guarantee_n_mod4: max_guaranteed_n(r.p, mod4_threshold),
    }
}

/// Limiting bin mass; flagged where the limit law is not established.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theoretical {
    Value(f64),
    Conjectural(f64),
}

impl Theoretical {
    pub fn value(self) -> f64 {
        match self {
            Theoretical::Value(v) | Theoretical::Conjectural(v) => v,
        }
    }
}

const CONJECTURAL: &str = "conjectural:";

impl Serialize for Theoretical {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Theoretical::Value(v) => s.serialize_f64(v),
            Theoretical::Conjectural(v) => s.serialize_str(&format!("{CONJECTURAL}{v}")),
        }
    }
}

impl<'de> Deserialize<'de> for Theoretical {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Theoretical;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or `conjectural:<number>`")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Theoretical, E> {
                Ok(Theoretical::Value(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Theoretical, E> {
                Ok(Theoretical::Value(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Theoretical, E> {
                Ok(Theoretical::Value(v as f64))
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Theoretical, E> {
                match s.strip_prefix(CONJECTURAL) {
                    Some(rest) => rest.parse().map(Theoretical::Conjectural).map_err(E::custom),
                    None => s.parse().map(Theoretical::Value).map_err(E::custom),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistRow {
    pub p: u64,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub empirical: f64,
    pub theoretical: Theoretical,
    pub mode: String,
    pub seed: Option<u64>,
    pub samples: u64,
}

pub fn dist_rows(h: &DeltaHistogram) -> Vec<DistRow> {
    let seed = match h.mode {
        SampleMode::Exhaustive => None,
        SampleMode::Sampled { seed, .. } => Some(seed),
    };
    (0..h.bins())
        .map(|i| {
            let th = round_sig12(h.theoretical[i]);
            DistRow {
                p: h.p,
                bin_lo: round_sig12(h.edges[i]),
                bin_hi: round_sig12(h.edges[i + 1]),
                empirical: round_sig12(h.empirical[i]),
                theoretical: if h.conjectural {
                    Theoretical::Conjectural(th)
                } else {
                    Theoretical::Value(th)
                },
                mode: h.mode.name().to_string(),
                seed,
                samples: h.samples,
            }
        })
        .collect()
}

pub fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes rows, emitting the header even when there are none.
pub fn write_csv_with_header<W: Write, T: Serialize>(
    w: W,
    header: &[&str],
    rows: &[T],
) -> csv::Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(header)?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read, T: DeserializeOwned>(r: R) -> csv::Result<Vec<T>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

/// Known file schemas, recognized by their header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Census,
    Cover,
    CoverThreshold,
    Dist,
}

pub fn detect_schema(header: &csv::StringRecord) -> Option<Schema> {
    let cols: Vec<&str> = header.iter().collect();
    [
        (Schema::Census, CENSUS_HEADER),
        (Schema::Cover, COVER_HEADER),
        (Schema::CoverThreshold, COVER_THRESHOLD_HEADER),
        (Schema::Dist, DIST_HEADER),
    ]
    .into_iter()
    .find(|(_, h)| cols == *h)
    .map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{census_brute, CensusOptions};
    use crate::cover::greedy_leafless;
    use crate::dist::{DeltaCensus, DEFAULT_BINS, DEFAULT_RANGE};
    use crate::field::PrimeField;
    use proptest::prelude::*;

    fn roundtrip<T: Serialize + DeserializeOwned + PartialEq + fmt::Debug>(rows: &[T]) {
        let mut buf = Vec::new();
        write_csv(&mut buf, rows).unwrap();
        let back: Vec<T> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn census_schema() {
        let f = PrimeField::new(29).unwrap();
        let h = census_brute(&f, 3, &CensusOptions { bucket: Some(3), ..Default::default() }).unwrap();
        let rows = census_rows(&h);
        assert_eq!(rows.last().unwrap().k, ">=3");
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p,n,k,count,total,method,bucket\n"));
        assert!(text.contains(",brute,3\n"));
        roundtrip(&rows);
        let unbucketed = census_rows(&census_brute(&f, 2, &CensusOptions::unbucketed()).unwrap());
        roundtrip(&unbucketed);
    }

    #[test]
    fn cover_schema() {
        let f = PrimeField::new(7).unwrap();
        let row = cover_row(&greedy_leafless(&f).unwrap());
        assert_eq!(row.shifts, "0;1;2");
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&row)).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "p,n,shifts,leafless,log2_ceiling\n7,3,0;1;2,true,3\n"
        );
        roundtrip(&[row]);
        roundtrip(&[cover_threshold_row(&greedy_leafless(&PrimeField::new(151).unwrap()).unwrap())]);
        assert_eq!(parse_shifts("0;1;2").unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn dist_schema() {
        for (p, mode) in [(31u64, None), (3, None), (61, Some(9u64))] {
            let f = PrimeField::new(p).unwrap();
            let census = match mode {
                None => DeltaCensus::exhaustive(&f, u128::MAX).unwrap(),
                Some(seed) => DeltaCensus::sampled(&f, 1000, seed).unwrap(),
            };
            let h = DeltaHistogram::from_census(&census, DEFAULT_RANGE, DEFAULT_BINS).unwrap();
            let rows = dist_rows(&h);
            assert_eq!(rows.len(), 60);
            assert_eq!(matches!(rows[0].theoretical, Theoretical::Conjectural(_)), p == 3);
            roundtrip(&rows);
            let json = serde_json::to_string(&rows[30]);
            assert!(json.is_ok());
        }
    }

    #[test]
    fn schema_detection() {
        let rec = csv::StringRecord::from(DIST_HEADER.to_vec());
        assert_eq!(detect_schema(&rec), Some(Schema::Dist));
        let rec = csv::StringRecord::from(vec!["p", "x"]);
        assert_eq!(detect_schema(&rec), None);
    }

    proptest! {
        #[test]
        fn sig12_is_idempotent(x in -1e6f64..1e6) {
            let r = round_sig12(x);
            prop_assert_eq!(round_sig12(r), r);
            prop_assert!((r - x).abs() <= x.abs() * 1e-11);
        }

        #[test]
        fn dist_row_roundtrip(lo in -1.0f64..1.0, w in 0.0f64..1.0, e in 0.0f64..1.0, t in 0.0f64..1.0, conj in any::<bool>(), seed in proptest::option::of(any::<u64>())) {
            let th = round_sig12(t);
            let row = DistRow {
                p: 101,
                bin_lo: round_sig12(lo),
                bin_hi: round_sig12(lo + w),
                empirical: round_sig12(e),
                theoretical: if conj { Theoretical::Conjectural(th) } else { Theoretical::Value(th) },
                mode: "sampled".into(),
                seed,
                samples: 17,
            };
            let mut buf = Vec::new();
            write_csv(&mut buf, std::slice::from_ref(&row)).unwrap();
            let back: Vec<DistRow> = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, vec![row]);
        }
    }
}
