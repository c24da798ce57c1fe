//! Self-check suites: every closed form, bound and invariant is recomputed
//! against direct leaf counts over a range of primes.

use crate::census::{min_max_leaves, DEFAULT_BUDGET};
use crate::cover::{ceil_log2, greedy_leafless, intersect_shifted_squares, leaf_guarantee_threshold};
use crate::curves::{frobenius_angle, trace_unchecked, leaf_count_closed3_with_trace};
use crate::dist::{rho_theoretical, DeltaCensus, SUPPORT};
use crate::error::{Error, Result};
use crate::field::{primes_in, PrimeField};
use crate::leaves::{bound_count_n, count_leaves, leaf_count_closed1, leaf_count_closed2, ShiftFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ClosedForms,
    Bounds,
    Orbit,
    Covers,
    Dist,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::ClosedForms,
        Suite::Bounds,
        Suite::Orbit,
        Suite::Covers,
        Suite::Dist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ClosedForms => "closed-forms",
            Suite::Bounds => "bounds",
            Suite::Orbit => "orbit",
            Suite::Covers => "covers",
            Suite::Dist => "dist",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: u64,
    /// Checks skipped because they would exceed the work budget.
    pub skipped: u64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checks: 0,
            skipped: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs one suite over the odd primes up to `pmax`.
pub fn run_suite(suite: Suite, pmax: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(suite);
    for p in primes_in(3, pmax) {
        let f = PrimeField::new(p)?;
        match suite {
            Suite::ClosedForms => closed_forms(&f, &mut r)?,
            Suite::Bounds => bounds(&f, &mut r)?,
            Suite::Orbit => orbit(&f, &mut r)?,
            Suite::Covers => covers(&f, &mut r)?,
            Suite::Dist => dist(&f, &mut r)?,
        }
    }
    Ok(r)
}

fn leaves_of(f: &PrimeField, shifts: &[u64]) -> Result<u64> {
    Ok(count_leaves(&ShiftFamily::new(f, shifts.iter().copied())?).get())
}

fn closed_forms(f: &PrimeField, r: &mut SuiteReport) -> Result<()> {
    let p = f.p();
    for a in 0..p {
        let (direct, closed) = (leaves_of(f, &[a])?, leaf_count_closed1(f, a)?.get());
        r.check(direct == closed, || format!("p={p} ({a}): direct {direct}, closed {closed}"));
    }
    for a in 0..p {
        for b in a + 1..p {
            let (direct, closed) = (leaves_of(f, &[a, b])?, leaf_count_closed2(f, a, b)?.get());
            r.check(direct == closed, || {
                format!("p={p} ({a},{b}): direct {direct}, closed {closed}")
            });
        }
    }
    if p < 5 {
        return Ok(());
    }
    // Leaf counts and traces depend only on differences, so a = 0 suffices.
    for b in 1..p {
        for c in b + 1..p {
            let direct = leaves_of(f, &[0, b, c])?;
            for (x, y, z) in [(0, b, c), (c, 0, b), (b, c, 0)] {
                let t = trace_unchecked(f, x, y, z);
                r.check(t * t <= 4 * p as i64, || format!("p={p} ({x},{y},{z}): trace {t} outside Hasse bound"));
                let closed = leaf_count_closed3_with_trace(f, x, y, z, t).map(|l| l.get());
                r.check(closed == Ok(direct), || {
                    format!("p={p} ({x},{y},{z}): direct {direct}, closed {closed:?}")
                });
            }
        }
    }
    Ok(())
}

fn bounds(f: &PrimeField, r: &mut SuiteReport) -> Result<()> {
    let p = f.p();
    for n in 1..=4usize.min(p as usize) {
        let ext = match min_max_leaves(f, n, DEFAULT_BUDGET / 10) {
            Ok(e) => e,
            Err(Error::BudgetExceeded { .. }) => {
                r.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let iv = bound_count_n(f, n)?;
        for l in [ext.min, ext.max] {
            r.check(iv.contains(l as f64), || {
                format!("p={p} n={n}: L={l} outside ({}, {})", iv.lower, iv.upper)
            });
        }
        if n == 3 {
            let slack = (p as f64).sqrt() / 4.0 + 2.0;
            for l in [ext.min, ext.max] {
                r.check((l as f64 - p as f64 / 8.0).abs() <= slack, || {
                    format!("p={p}: |L - p/8| for L={l} exceeds sqrt(p)/4 + 2")
                });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    for n in 1..=4usize.min(p as usize) {
        for _ in 0..25 {
            let shifts = random_family(&mut rng, p, n);
            let fam = ShiftFamily::new(f, shifts.iter().copied())?;
            let i = intersect_shifted_squares(&fam);
            let limit = n as f64 * (p as f64).sqrt() / 2.0;
            r.check(i.deviation < limit, || {
                format!("p={p} {shifts:?}: intersection {} deviates by {}", i.count, i.deviation)
            });
        }
    }
    Ok(())
}

fn random_family(rng: &mut ChaCha8Rng, p: u64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = rng.random_range(0..p);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn orbit(f: &PrimeField, r: &mut SuiteReport) -> Result<()> {
    let p = f.p();
    if p < 5 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p ^ 0x6f_7262_6974);
    for _ in 0..200 {
        let n = rng.random_range(2..=4usize);
        let shifts = random_family(&mut rng, p, n);
        let base = leaves_of(f, &shifts)?;
        let s = rng.random_range(0..p);
        let u = rng.random_range(1..p);
        let square = f.mul(u, u);
        let translated: Vec<u64> = shifts.iter().map(|&a| f.add(a, s)).collect();
        let scaled: Vec<u64> = shifts.iter().map(|&a| f.mul(a, square)).collect();
        for (what, image) in [("translate", translated), ("scale", scaled)] {
            let l = leaves_of(f, &image)?;
            r.check(l == base, || format!("p={p} {shifts:?}: {what} {image:?} has {l} leaves, not {base}"));
        }
    }
    Ok(())
}

fn covers(f: &PrimeField, r: &mut SuiteReport) -> Result<()> {
    let p = f.p();
    let cover = greedy_leafless(f)?;
    r.check(cover.leafless, || format!("p={p}: greedy family {:?} has a leaf", cover.shifts));
    r.check(cover.n() <= ceil_log2(p) as usize, || {
        format!("p={p}: greedy family has {} shifts", cover.n())
    });
    for n in 1..=3usize.min(p as usize) {
        if !leaf_guarantee_threshold(n as u64, p) {
            continue;
        }
        match min_max_leaves(f, n, DEFAULT_BUDGET / 10) {
            Ok(ext) => r.check(ext.min > 0, || format!("p={p} n={n}: a leafless family exists below threshold")),
            Err(Error::BudgetExceeded { .. }) => r.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn dist(f: &PrimeField, r: &mut SuiteReport) -> Result<()> {
    let p = f.p();
    if p < 5 {
        return Ok(());
    }
    let census = match DeltaCensus::exhaustive(f, DEFAULT_BUDGET) {
        Ok(c) => c,
        Err(Error::BudgetExceeded { .. }) => {
            r.skipped += 1;
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    r.check(census.total == p * (p - 1) * (p - 2), || {
        format!("p={p}: census covers {} triples", census.total)
    });
    let mass = census.rho(-1.0, 1.0);
    r.check((mass - 1.0).abs() < 1e-12, || format!("p={p}: total mass {mass}"));
    let slack = 0.25 + 2.0 / (p as f64).sqrt();
    for &l in census.counts.keys() {
        let d = crate::curves::delta_of(l, p);
        r.check(d.abs() <= slack + 1e-12, || format!("p={p}: Delta {d} for L={l} exceeds the corollary bound"));
    }
    for t in -2 * (p as f64).sqrt() as i64..=2 * (p as f64).sqrt() as i64 {
        r.check(frobenius_angle(t, p).is_ok(), || format!("p={p}: angle undefined for t={t}"));
    }
    let full = rho_theoretical(-SUPPORT, SUPPORT)?;
    r.check((full - 1.0).abs() < 1e-12, || format!("limiting mass is {full}"));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_primes() {
        for s in Suite::ALL {
            let r = run_suite(s, 31).unwrap();
            assert!(r.passed(), "{s}: {:?}", r.failures);
            assert!(r.checks > 0);
        }
    }

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }
}
