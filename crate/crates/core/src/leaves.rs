//! Leaf counting for `G(X^2 + a_1, ..., X^2 + a_n)` over `F_p`.
//!
//! A vertex `v` is a leaf iff `v - a_i` is a non-square for every shift, i.e.
//! `v` lies outside every translate `Q_p + a_i`. Two kernels are provided: a
//! word-parallel OR of rotated square indicators, and a per-vertex scan with
//! early exit that needs no table.

use crate::bits::{tail_mask, word_count, BitRow};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use std::fmt;

/// A set of pairwise-distinct shifts, stored sorted ascending.
#[derive(Debug, Clone)]
pub struct ShiftFamily<'f> {
    field: &'f PrimeField,
    shifts: Vec<u64>,
}

impl<'f> ShiftFamily<'f> {
    /// Validates and sorts `shifts`. Duplicates are an error, not deduplicated.
    pub fn new<I: IntoIterator<Item = u64>>(field: &'f PrimeField, shifts: I) -> Result<Self> {
        let mut shifts: Vec<u64> = shifts.into_iter().collect();
        for &a in &shifts {
            field.check(a)?;
        }
        if shifts.is_empty() {
            return Err(Error::EmptyFamily);
        }
        shifts.sort_unstable();
        if let Some(w) = shifts.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateShift(w[0]));
        }
        Ok(ShiftFamily { field, shifts })
    }

    #[inline]
    pub fn field(&self) -> &'f PrimeField {
        self.field
    }

    #[inline]
    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// The family `{u * a_i}`.
    pub fn scaled(&self, u: u64) -> Result<ShiftFamily<'f>> {
        if u.is_multiple_of(self.field.p()) {
            return Err(Error::InvalidArgument("scale factor must be nonzero".into()));
        }
        ShiftFamily::new(
            self.field,
            self.shifts.iter().map(|&a| self.field.mul(a, u % self.field.p())),
        )
    }

    /// Union of the translates `Q_p + a_i` as a bit row.
    pub fn cover_row(&self) -> Result<BitRow> {
        let squares = self
            .field
            .squares()
            .ok_or(Error::TableUnavailable { p: self.field.p() })?;
        let mut row = BitRow::zeros(squares.len());
        for &a in &self.shifts {
            row.or_assign(&squares.rotated(a as usize));
        }
        Ok(row)
    }
}

/// Number of leaves of one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafCount(pub u64);

impl LeafCount {
    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for LeafCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// OR of the rotated square rows, counting the zero bits.
pub fn count_leaves_bitset(fam: &ShiftFamily<'_>) -> Result<LeafCount> {
    let p = fam.field.p();
    let squares = fam.field.squares().ok_or(Error::TableUnavailable { p })?;
    let len = p as usize;
    let words = word_count(len);
    let mut covered = 0u64;
    for w in 0..words {
        let mut acc = 0u64;
        for &a in &fam.shifts {
            acc |= squares.rotated_word(a as usize, w);
            if acc == u64::MAX {
                break;
            }
        }
        covered += acc.count_ones() as u64;
    }
    Ok(LeafCount(p - covered))
}

/// Per-vertex scan with early exit on the first shift that reaches `v`.
pub fn count_leaves_scan(fam: &ShiftFamily<'_>) -> LeafCount {
    let f = fam.field;
    let leaves = (0..f.p())
        .filter(|&v| fam.shifts.iter().all(|&a| !f.is_square(f.sub(v, a))))
        .count();
    LeafCount(leaves as u64)
}

/// Bitset kernel when the field has a table, scan otherwise.
pub fn count_leaves(fam: &ShiftFamily<'_>) -> LeafCount {
    count_leaves_bitset(fam).unwrap_or_else(|_| count_leaves_scan(fam))
}

/// `L(a) = (p - 1) / 2` for a single map.
pub fn leaf_count_closed1(field: &PrimeField, a: u64) -> Result<LeafCount> {
    field.check(a)?;
    Ok(LeafCount((field.p() - 1) / 2))
}

/// Closed form for two maps: `k + (chi(a - b) - 1) / 2` when `p = 4k + 1`,
/// and `k` when `p = 4k + 3`.
pub fn leaf_count_closed2(field: &PrimeField, a: u64, b: u64) -> Result<LeafCount> {
    field.check(a)?;
    field.check(b)?;
    if a == b {
        return Err(Error::NotDistinct);
    }
    let k = field.p() / 4;
    if field.is_one_mod_four() {
        let chi = field.chi(field.sub(a, b)).value();
        Ok(LeafCount((k as i64 + (chi - 1) / 2) as u64))
    } else {
        Ok(LeafCount(k))
    }
}

/// Open interval `(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }
}

/// Admissible range of `L` for any family of `n` shifts:
/// `|L - p / 2^n| < c n sqrt(p)` with `c = 1/2` when `n < 2 sqrt(p)`, else `2/3`.
pub fn bound_count_n(field: &PrimeField, n: usize) -> Result<Interval> {
    let p = field.p();
    if n == 0 || n as u64 > p {
        return Err(Error::InvalidArgument(format!(
            "family size {n} must satisfy 1 <= n <= {p}"
        )));
    }
    let pf = p as f64;
    let sqrt_p = pf.sqrt();
    // n < 2 sqrt(p)  <=>  n^2 < 4p
    let c = if (n as u128).pow(2) < 4 * p as u128 {
        0.5
    } else {
        2.0 / 3.0
    };
    let center = pf / 2f64.powi(n as i32);
    let radius = c * n as f64 * sqrt_p;
    Ok(Interval {
        lower: center - radius,
        upper: center + radius,
    })
}

/// All cyclic rotations of the square row, one row per shift. Used by the
/// enumeration kernels where the same rotations are OR-ed millions of times.
pub struct RotationTable {
    p: usize,
    words: usize,
    rows: Vec<u64>,
}

impl RotationTable {
    /// Bytes a table for `p` would occupy.
    pub fn footprint(p: u64) -> u64 {
        p * word_count(p as usize) as u64 * 8
    }

    pub fn new(field: &PrimeField) -> Result<Self> {
        let squares = field
            .squares()
            .ok_or(Error::TableUnavailable { p: field.p() })?;
        let p = field.p() as usize;
        let words = word_count(p);
        let mut rows = Vec::with_capacity(p * words);
        for a in 0..p {
            rows.extend((0..words).map(|w| squares.rotated_word(a, w)));
        }
        Ok(RotationTable { p, words, rows })
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn words(&self) -> usize {
        self.words
    }

    /// Indicator row of `Q_p + a`.
    #[inline]
    pub fn row(&self, a: usize) -> &[u64] {
        &self.rows[a * self.words..(a + 1) * self.words]
    }

    /// `dst = src | row(a)`.
    #[inline]
    pub fn or_into(&self, src: &[u64], a: usize, dst: &mut [u64]) {
        for ((d, s), r) in dst.iter_mut().zip(src).zip(self.row(a)) {
            *d = s | r;
        }
    }

    /// Zero bits of an accumulated row, i.e. its leaf count.
    #[inline]
    pub fn zeros(&self, acc: &[u64]) -> u64 {
        let covered: u32 = acc.iter().map(|w| w.count_ones()).sum();
        self.p as u64 - covered as u64
    }

    pub fn tail_mask(&self) -> u64 {
        tail_mask(self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::primes_in;
    use proptest::prelude::*;

    fn fam<'f>(f: &'f PrimeField, s: &[u64]) -> ShiftFamily<'f> {
        ShiftFamily::new(f, s.iter().copied()).unwrap()
    }

    #[test]
    fn worked_examples() {
        let f7 = PrimeField::new(7).unwrap();
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(count_leaves_bitset(&fam(&f7, &[0])).unwrap(), LeafCount(3));
        assert_eq!(count_leaves_bitset(&fam(&f7, &[0, 1, 2])).unwrap(), LeafCount(0));
        assert_eq!(
            count_leaves_bitset(&fam(&f7, &[0, 1, 2, 3, 4, 5, 6])).unwrap(),
            LeafCount(0)
        );
        assert_eq!(count_leaves_scan(&fam(&f7, &[0])), LeafCount(3));
        assert_eq!(count_leaves_scan(&fam(&f5, &[0, 1])), LeafCount(1));
        assert_eq!(count_leaves_scan(&fam(&f7, &[0, 1, 2])), LeafCount(0));
    }

    #[test]
    fn family_validation() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(
            ShiftFamily::new(&f7, [0, 0]).unwrap_err(),
            Error::DuplicateShift(0)
        );
        assert_eq!(
            ShiftFamily::new(&f7, [7]).unwrap_err(),
            Error::ElementOutOfRange { value: 7, p: 7 }
        );
        assert_eq!(ShiftFamily::new(&f7, []).unwrap_err(), Error::EmptyFamily);
        assert_eq!(fam(&f7, &[5, 1, 3]).shifts(), &[1, 3, 5]);
    }

    #[test]
    fn bitset_requires_table() {
        let f = PrimeField::with_table_limit(101, 0).unwrap();
        let family = fam(&f, &[0, 1]);
        assert_eq!(
            count_leaves_bitset(&family).unwrap_err(),
            Error::TableUnavailable { p: 101 }
        );
        let with_table = PrimeField::new(101).unwrap();
        assert_eq!(count_leaves_scan(&family), count_leaves(&fam(&with_table, &[0, 1])));
    }

    #[test]
    fn closed_form_examples() {
        let f = |p| PrimeField::new(p).unwrap();
        assert_eq!(leaf_count_closed1(&f(7), 0).unwrap(), LeafCount(3));
        assert_eq!(leaf_count_closed1(&f(3), 2).unwrap(), LeafCount(1));
        assert_eq!(leaf_count_closed1(&f(541), 9).unwrap(), LeafCount(270));
        assert_eq!(leaf_count_closed2(&f(7), 0, 1).unwrap(), LeafCount(1));
        assert_eq!(leaf_count_closed2(&f(13), 1, 0).unwrap(), LeafCount(3));
        assert_eq!(leaf_count_closed2(&f(5), 0, 2).unwrap(), LeafCount(0));
        assert_eq!(leaf_count_closed2(&f(5), 2, 2).unwrap_err(), Error::NotDistinct);
        // scan oracle for the same three
        assert_eq!(count_leaves_scan(&fam(&f(7), &[0, 1])), LeafCount(1));
        assert_eq!(count_leaves_scan(&fam(&f(13), &[0, 1])), LeafCount(3));
        assert_eq!(count_leaves_scan(&fam(&f(5), &[0, 2])), LeafCount(0));
    }

    #[test]
    fn bound_examples() {
        let f29 = PrimeField::new(29).unwrap();
        let i = bound_count_n(&f29, 2).unwrap();
        let r = 29f64.sqrt();
        assert!((i.lower - (29.0 / 4.0 - r)).abs() < 1e-12);
        assert!((i.upper - (29.0 / 4.0 + r)).abs() < 1e-12);
        let f7 = PrimeField::new(7).unwrap();
        assert!(bound_count_n(&f7, 1).unwrap().contains(3.0));
        assert!(bound_count_n(&f7, 7).unwrap().contains(0.0));
        assert!(bound_count_n(&f7, 0).is_err());
        assert!(bound_count_n(&f7, 8).is_err());
    }

    #[test]
    fn rotation_table_rows_match_translates() {
        let f = PrimeField::new(131).unwrap();
        let t = RotationTable::new(&f).unwrap();
        let sq = f.squares().unwrap();
        for a in [0usize, 1, 64, 130] {
            assert_eq!(t.row(a), sq.rotated(a).words());
        }
    }

    #[test]
    fn closed_forms_match_scan_small() {
        for p in primes_in(3, 41) {
            let f = PrimeField::new(p).unwrap();
            for a in 0..p {
                assert_eq!(
                    leaf_count_closed1(&f, a).unwrap(),
                    count_leaves_scan(&fam(&f, &[a]))
                );
                for b in (0..p).filter(|&b| b != a) {
                    assert_eq!(
                        leaf_count_closed2(&f, a, b).unwrap(),
                        count_leaves_scan(&fam(&f, &[a, b]))
                    );
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2_000))]
        #[test]
        fn kernels_agree_and_growth_is_monotone(
            pi in 0usize..1229,
            raw in proptest::collection::vec(any::<u64>(), 1..12),
        ) {
            static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
            let primes = PRIMES.get_or_init(|| primes_in(3, 10_000).collect());
            let f = PrimeField::new(primes[pi % primes.len()]).unwrap();
            let mut chain: Vec<u64> = Vec::new();
            let mut prev = f.p();
            for r in raw {
                let a = r % f.p();
                if chain.contains(&a) { continue; }
                chain.push(a);
                let family = ShiftFamily::new(&f, chain.iter().copied()).unwrap();
                let scan = count_leaves_scan(&family);
                prop_assert_eq!(count_leaves_bitset(&family).unwrap(), scan);
                prop_assert!(scan.get() <= prev);
                prop_assert!(scan.get() <= f.p() - family.len() as u64);
                prev = scan.get();
            }
        }
    }
}
