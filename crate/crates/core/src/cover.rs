//! Leafless families: translates `Q_p + a_i` that together cover `F_p`.
//!
//! [`greedy_leafless`] starts from `a_1 = 0` and repeatedly adds the shift
//! whose translate covers the most still-uncovered points. Some translate
//! always covers at least half of any set, so the residual halves each step
//! and at most `ceil(log2 p)` shifts are needed.

use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::leaves::{count_leaves_scan, ShiftFamily};
use rayon::prelude::*;
use std::cmp::Reverse;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverReport {
    pub p: u64,
    /// In construction order; `shifts[0] = 0`.
    pub shifts: Vec<u64>,
    /// `|S_i|` after each step.
    pub residuals: Vec<u64>,
    pub leafless: bool,
}

impl CoverReport {
    pub fn n(&self) -> usize {
        self.shifts.len()
    }
}

/// `ceil(log2 p)` for `p >= 2`.
pub fn ceil_log2(p: u64) -> u32 {
    64 - (p - 1).leading_zeros()
}

/// The shift `a` maximizing `|S ∩ (Q_p + a)|`, smallest `a` on ties, with its
/// coverage.
pub fn best_cover_shift(field: &PrimeField, residual: &BitRow) -> Result<(u64, u64)> {
    let squares = field
        .squares()
        .ok_or(Error::TableUnavailable { p: field.p() })?;
    if residual.len() != squares.len() {
        return Err(Error::InvalidArgument(format!(
            "residual has {} bits, field has {}",
            residual.len(),
            squares.len()
        )));
    }
    if residual.count_ones() == 0 {
        return Err(Error::EmptySet);
    }
    let (coverage, Reverse(a)) = (0..field.p() as usize)
        .into_par_iter()
        .map(|a| {
            let covered: u32 = residual
                .words()
                .iter()
                .enumerate()
                .map(|(w, s)| (s & squares.rotated_word(a, w)).count_ones())
                .sum();
            (covered as u64, Reverse(a as u64))
        })
        .max()
        .expect("field is nonempty");
    Ok((a, coverage))
}

/// Greedy construction of a leafless family, checking the halving invariant at
/// every step and the `ceil(log2 p)` size bound at the end.
pub fn greedy_leafless(field: &PrimeField) -> Result<CoverReport> {
    let p = field.p();
    let squares = field.squares().ok_or(Error::TableUnavailable { p })?;
    let mut residual = BitRow::ones(p as usize);
    residual.and_not_assign(squares);
    let mut shifts = vec![0u64];
    let mut residuals = vec![residual.count_ones() as u64];
    check_step_bound(p, 0, residuals[0])?;
    while residual.count_ones() > 0 {
        let before = residual.count_ones() as u64;
        let (a, coverage) = best_cover_shift(field, &residual)?;
        if shifts.contains(&a) {
            return Err(Error::Inconsistency(format!(
                "greedy step repeated shift {a} for p = {p}"
            )));
        }
        if 2 * coverage < before {
            return Err(Error::Inconsistency(format!(
                "shift {a} covers {coverage} of {before} residual points for p = {p}"
            )));
        }
        residual.and_not_assign(&squares.rotated(a as usize));
        let after = residual.count_ones() as u64;
        debug_assert_eq!(after, before - coverage);
        shifts.push(a);
        residuals.push(after);
        check_step_bound(p, residuals.len() - 1, after)?;
    }
    let bound = ceil_log2(p) as usize;
    if shifts.len() > bound {
        return Err(Error::Inconsistency(format!(
            "greedy family for p = {p} has {} shifts, above ceil(log2 p) = {bound}",
            shifts.len()
        )));
    }
    let family = ShiftFamily::new(field, shifts.iter().copied())?;
    Ok(CoverReport {
        p,
        shifts,
        residuals,
        leafless: verify_leafless(&family),
    })
}

/// `|S_{i+1}| < p / 2^{i+1}` for the 0-based step index `i`.
fn check_step_bound(p: u64, step: usize, residual: u64) -> Result<()> {
    let scaled = (residual as u128).checked_shl(step as u32 + 1).unwrap_or(u128::MAX);
    if residual > 0 && scaled >= p as u128 {
        return Err(Error::Inconsistency(format!(
            "residual {residual} after step {} is not below p / 2^{} for p = {p}",
            step + 1,
            step + 1
        )));
    }
    Ok(())
}

/// True iff the translates cover `F_p`.
pub fn verify_leafless(fam: &ShiftFamily<'_>) -> bool {
    count_leaves_scan(fam).get() == 0
}

fn below(n: u64, exp: u64, p: u64) -> bool {
    u32::try_from(exp)
        .ok()
        .and_then(|e| 1u128.checked_shl(e))
        .and_then(|pow| pow.checked_mul((n as u128).pow(2)))
        .is_some_and(|v| v < p as u128)
}

/// `n^2 2^{4n-4} < p`: every family of `n` shifts has a leaf.
pub fn general_threshold(n: u64, p: u64) -> bool {
    n >= 1 && below(n, 4 * n - 4, p)
}

/// `p = 3 (mod 4)` and `n^2 2^{2n-2} < p`: every family of `n` shifts has a leaf.
pub fn mod4_threshold(n: u64, p: u64) -> bool {
    n >= 1 && p % 4 == 3 && below(n, 2 * n - 2, p)
}

/// Whether either sufficient condition guarantees a leaf for every family of
/// size `n` over `F_p`.
pub fn leaf_guarantee_threshold(n: u64, p: u64) -> bool {
    general_threshold(n, p) || mod4_threshold(n, p)
}

/// Largest `n` satisfying `pred(n, p)`, or 0.
pub fn max_guaranteed_n(p: u64, pred: fn(u64, u64) -> bool) -> u64 {
    (1..64).take_while(|&n| pred(n, p)).last().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub count: u64,
    /// `|count - p / 2^n|`.
    pub deviation: f64,
}

/// `|∩ (Q_p + a_i)|` by direct scan.
pub fn intersect_shifted_squares(fam: &ShiftFamily<'_>) -> Intersection {
    let f = fam.field();
    let count = (0..f.p())
        .filter(|&v| fam.shifts().iter().all(|&a| f.is_square(f.sub(v, a))))
        .count() as u64;
    let expected = f.p() as f64 / 2f64.powi(fam.len() as i32);
    Intersection {
        count,
        deviation: (count as f64 - expected).abs(),
    }
}
