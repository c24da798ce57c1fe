//! Distribution of the normalized three-map deviation
//! `Delta(a,b,c) = (L(a,b,c) - p/8) / sqrt(p)` against the semicircle law.
//!
//! Since `8 L ≈ p + t` with `|t| <= 2 sqrt(p)`, the deviation is essentially
//! `cos(psi) / 4` for the Frobenius angle `psi`, and the Sato-Tate measure
//! `(2/pi) sin^2(psi) dpsi` becomes `(2/pi) sqrt(1 - z^2) dz` with `z = 4 Delta`.
//!
//! Empirical data is kept as exact counts of ordered triples per leaf count,
//! so every derived fraction is an exact ratio of integers.

use crate::census::SAMPLE_CHUNK;
use crate::curves::{delta_of, leaf_count_closed3_with_trace, trace_unchecked};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

/// Default histogram support and resolution.
pub const DEFAULT_RANGE: (f64, f64) = (-0.30, 0.30);
pub const DEFAULT_BINS: usize = 60;

/// Support of the limiting law in the Delta coordinate.
pub const SUPPORT: f64 = 0.25;

const EDGE_EPS: f64 = 1e-12;

/// Sato-Tate mass of the angle interval `[alpha, beta] ⊆ [0, pi]`.
pub fn sato_tate_mass(alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&alpha) || !(0.0..=PI).contains(&beta) || alpha > beta {
        return Err(Error::InvalidInterval {
            lo: alpha,
            hi: beta,
            reason: "need 0 <= alpha <= beta <= pi",
        });
    }
    // antiderivative of (2/pi) sin^2
    let cdf = |x: f64| (x - x.sin() * x.cos()) / PI;
    Ok(cdf(beta) - cdf(alpha))
}

/// Limiting mass of `Delta ∈ [sigma, tau] ⊆ [-1/4, 1/4]`:
/// `(2/pi) ∫_{4 sigma}^{4 tau} sqrt(1 - z^2) dz`.
pub fn rho_theoretical(sigma: f64, tau: f64) -> Result<f64> {
    if sigma < -SUPPORT || tau > SUPPORT || sigma > tau || sigma.is_nan() || tau.is_nan() {
        return Err(Error::InvalidInterval {
            lo: sigma,
            hi: tau,
            reason: "need -1/4 <= sigma <= tau <= 1/4",
        });
    }
    Ok(semicircle_cdf(4.0 * tau) - semicircle_cdf(4.0 * sigma))
}

/// `(2/pi) ∫_{-1}^{z} sqrt(1 - x^2) dx` for `z ∈ [-1, 1]`.
fn semicircle_cdf(z: f64) -> f64 {
    let z = z.clamp(-1.0, 1.0);
    (z * (1.0 - z * z).sqrt() + z.asin() + FRAC_PI_2) / PI
}

/// Limiting mass of `[sigma, tau]` after intersecting with `[-1/4, 1/4]`.
fn rho_theoretical_clipped(sigma: f64, tau: f64) -> f64 {
    let lo = sigma.max(-SUPPORT);
    let hi = tau.min(SUPPORT);
    if lo >= hi {
        0.0
    } else {
        rho_theoretical(lo, hi).expect("clipped interval is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

impl SampleMode {
    pub fn name(&self) -> &'static str {
        match self {
            SampleMode::Exhaustive => "exhaustive",
            SampleMode::Sampled { .. } => "sampled",
        }
    }
}

/// Ordered distinct triples `(a, b, c)` counted by their leaf count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaCensus {
    pub p: u64,
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
    pub mode: SampleMode,
}

/// Cost of [`DeltaCensus::exhaustive`] in character evaluations.
pub fn exhaustive_cost(p: u64) -> u128 {
    let p = p as u128;
    (p - 1) * (p - 2) / 2 * p
}

impl DeltaCensus {
    /// Every ordered distinct triple. `L` and `t` only depend on the
    /// differences, so the triples `(x, x + b, x + c)` share one value; the
    /// census visits `0 < b < c < p` and weights each by `2p` (two orders of
    /// `b, c`, times `p` translates).
    pub fn exhaustive(field: &PrimeField, budget: u128) -> Result<Self> {
        let p = field.p();
        if p < 3 {
            return Err(Error::InvalidArgument("need p >= 3".into()));
        }
        let cost = exhaustive_cost(p);
        if cost > budget {
            return Err(Error::BudgetExceeded {
                estimated: cost,
                budget,
                suggestion: "use sampled mode",
            });
        }
        let weight = 2 * p;
        let counts = (1..p)
            .into_par_iter()
            .map(|b| {
                let mut local = BTreeMap::<u64, u64>::new();
                for c in b + 1..p {
                    let t = trace_unchecked(field, 0, b, c);
                    let l = leaf_count_closed3_with_trace(field, 0, b, c, t)?.get();
                    *local.entry(l).or_default() += weight;
                }
                Ok(local)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(BTreeMap::new(), merge);
        Ok(Self::finish(p, counts, SampleMode::Exhaustive))
    }

    /// Uniform ordered distinct triples, drawn in fixed chunks of
    /// [`SAMPLE_CHUNK`] from per-chunk ChaCha8 streams.
    pub fn sampled(field: &PrimeField, samples: u64, seed: u64) -> Result<Self> {
        let p = field.p();
        if p < 3 {
            return Err(Error::InvalidArgument("need p >= 3".into()));
        }
        let chunks = samples.div_ceil(SAMPLE_CHUNK);
        let counts = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(chunk);
                let n = SAMPLE_CHUNK.min(samples - chunk * SAMPLE_CHUNK);
                let mut local = BTreeMap::<u64, u64>::new();
                for _ in 0..n {
                    let s = crate::census::sample_distinct(&mut rng, p, 3);
                    let t = trace_unchecked(field, s[0], s[1], s[2]);
                    let l = leaf_count_closed3_with_trace(field, s[0], s[1], s[2], t)?.get();
                    *local.entry(l).or_default() += 1;
                }
                Ok(local)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(BTreeMap::new(), merge);
        Ok(Self::finish(p, counts, SampleMode::Sampled { samples, seed }))
    }

    fn finish(p: u64, counts: BTreeMap<u64, u64>, mode: SampleMode) -> Self {
        let total = counts.values().sum();
        DeltaCensus {
            p,
            counts,
            total,
            mode,
        }
    }

    /// Number of counted triples with `Delta ∈ [sigma, tau]`.
    pub fn count_in(&self, sigma: f64, tau: f64) -> u64 {
        self.counts
            .iter()
            .filter(|(&l, _)| {
                let d = delta_of(l, self.p);
                sigma <= d && d <= tau
            })
            .map(|(_, &c)| c)
            .sum()
    }

    /// Fraction of counted triples with `Delta ∈ [sigma, tau]`.
    pub fn rho(&self, sigma: f64, tau: f64) -> f64 {
        self.count_in(sigma, tau) as f64 / self.total as f64
    }
}

fn merge(mut acc: BTreeMap<u64, u64>, local: BTreeMap<u64, u64>) -> BTreeMap<u64, u64> {
    for (k, c) in local {
        *acc.entry(k).or_insert(0) += c;
    }
    acc
}

/// Empirical `rho_p(sigma, tau)`.
pub fn rho_empirical(
    field: &PrimeField,
    sigma: f64,
    tau: f64,
    mode: SampleMode,
    budget: u128,
) -> Result<f64> {
    if field.p() < 5 {
        return Err(Error::InvalidArgument(
            "the empirical distribution needs p >= 5".into(),
        ));
    }
    if sigma < DEFAULT_RANGE.0 - EDGE_EPS || tau > DEFAULT_RANGE.1 + EDGE_EPS || sigma > tau {
        return Err(Error::InvalidInterval {
            lo: sigma,
            hi: tau,
            reason: "need -0.30 <= sigma <= tau <= 0.30",
        });
    }
    let census = match mode {
        SampleMode::Exhaustive => DeltaCensus::exhaustive(field, budget)?,
        SampleMode::Sampled { samples, seed } => DeltaCensus::sampled(field, samples, seed)?,
    };
    Ok(census.rho(sigma, tau))
}

/// Binned empirical masses next to the limiting masses.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaHistogram {
    pub p: u64,
    /// `bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub empirical: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub mode: SampleMode,
    pub samples: u64,
    /// The limit law is only established for primes `p > 3`.
    pub conjectural: bool,
}

pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    (0..=bins).map(|i| lo + i as f64 * width).collect()
}

impl DeltaHistogram {
    /// Bins the census over `range`. Values outside the range land in the end
    /// bins, so the empirical masses always sum to 1.
    pub fn from_census(census: &DeltaCensus, range: (f64, f64), bins: usize) -> Result<Self> {
        if bins == 0 || range.0 >= range.1 {
            return Err(Error::InvalidInterval {
                lo: range.0,
                hi: range.1,
                reason: "need lo < hi and at least one bin",
            });
        }
        if census.total == 0 {
            return Err(Error::InvalidArgument("empty census".into()));
        }
        let edges = uniform_edges(range.0, range.1, bins);
        let width = (range.1 - range.0) / bins as f64;
        let mut counts = vec![0u64; bins];
        for (&l, &c) in &census.counts {
            let d = delta_of(l, census.p);
            let idx = ((d - range.0) / width).floor();
            let idx = if idx < 0.0 { 0 } else { (idx as usize).min(bins - 1) };
            counts[idx] += c;
        }
        let total = census.total as f64;
        let empirical = counts.iter().map(|&c| c as f64 / total).collect();
        Ok(DeltaHistogram {
            p: census.p,
            theoretical: theoretical_masses(&edges),
            edges,
            empirical,
            mode: census.mode,
            samples: census.total,
            conjectural: census.p <= 3,
        })
    }

    pub fn bins(&self) -> usize {
        self.empirical.len()
    }
}

/// Limiting mass of each bin.
pub fn theoretical_masses(edges: &[f64]) -> Vec<f64> {
    edges
        .windows(2)
        .map(|w| rho_theoretical_clipped(w[0], w[1]))
        .collect()
}

/// Largest gap between the empirical and limiting CDFs over the bin edges.
/// Empirical mass of bins outside `[-1/4, 1/4]` is moved to the nearest bin
/// inside it first.
pub fn sup_cdf_deviation(h: &DeltaHistogram) -> f64 {
    let mut mass = h.empirical.clone();
    let bins = mass.len();
    let first_inside = (0..bins).find(|&i| h.edges[i + 1] > -SUPPORT + EDGE_EPS);
    let last_inside = (0..bins).rev().find(|&i| h.edges[i] < SUPPORT - EDGE_EPS);
    if let (Some(first), Some(last)) = (first_inside, last_inside) {
        for i in 0..first {
            mass[first] += std::mem::take(&mut mass[i]);
        }
        for i in last + 1..bins {
            mass[last] += std::mem::take(&mut mass[i]);
        }
    }
    let mut cdf = 0.0;
    let mut worst: f64 = 0.0;
    for (i, &edge) in h.edges.iter().enumerate() {
        if i > 0 {
            cdf += mass[i - 1];
        }
        let e = edge.clamp(-SUPPORT, SUPPORT);
        let theo = rho_theoretical(-SUPPORT, e).expect("clamped edge");
        worst = worst.max((cdf - theo).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::DEFAULT_BUDGET;
    use crate::curves::leaf_count_closed3;
    use crate::field::primes_in;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    /// Unordered triples visited once, each weighted by its 6 orderings.
    fn unordered_census(f: &PrimeField) -> BTreeMap<u64, u64> {
        let p = f.p();
        let mut out = BTreeMap::new();
        for a in 0..p {
            for b in a + 1..p {
                for c in b + 1..p {
                    let l = leaf_count_closed3(f, a, b, c).unwrap().get();
                    *out.entry(l).or_default() += 6;
                }
            }
        }
        out
    }

    #[test]
    fn sato_tate_examples() {
        assert!((sato_tate_mass(0.0, PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((sato_tate_mass(0.0, FRAC_PI_2).unwrap() - 0.5).abs() < 1e-15);
        let expected = 2.0 / PI * (PI / 6.0 + 3f64.sqrt() / 4.0);
        let got = sato_tate_mass(PI / 3.0, 2.0 * PI / 3.0).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.608_997_781_044).abs() < 1e-9);
        assert!(sato_tate_mass(1.0, 0.5).is_err());
        assert!(sato_tate_mass(-0.1, 0.5).is_err());
    }

    #[test]
    fn rho_theoretical_examples() {
        assert!((rho_theoretical(-0.25, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!((rho_theoretical(0.0, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(rho_theoretical(-0.3, 0.1).is_err());
        for (s, t) in [(-0.25, -0.1), (-0.2, 0.05), (0.1, 0.24), (0.0, 0.0)] {
            let via_angle = sato_tate_mass((4.0f64 * t).acos(), (4.0f64 * s).acos()).unwrap();
            assert!((rho_theoretical(s, t).unwrap() - via_angle).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_matches_unordered_enumeration() {
        for p in primes_in(3, 37) {
            let f = field(p);
            let census = DeltaCensus::exhaustive(&f, DEFAULT_BUDGET).unwrap();
            assert_eq!(census.counts, unordered_census(&f), "p = {p}");
            assert_eq!(census.total, p * (p - 1) * (p - 2));
        }
    }

    #[test]
    fn empirical_examples() {
        let f7 = field(7);
        let inner = rho_empirical(&f7, -0.3, 0.3, SampleMode::Exhaustive, DEFAULT_BUDGET).unwrap();
        let census = DeltaCensus::exhaustive(&f7, DEFAULT_BUDGET).unwrap();
        assert_eq!(census.total, 210);
        // L = 0 and L = 2 fall outside [-0.3, 0.3] when p = 7
        assert_eq!(inner, census.count(1) as f64 / 210.0);
        assert_eq!(census.rho(-1.0, 1.0), 1.0);
        let d = -7.0 / 8.0 / 7f64.sqrt();
        // every translate of {0,1,2} has L = 0; nothing else is that low
        let window = census.count_in(d - 1e-9, d + 1e-9);
        let leafless_orbit: u64 = 6 * 7;
        assert_eq!(window, census.count(0));
        assert!(window >= leafless_orbit);
        assert!(rho_empirical(&field(3), -0.3, 0.3, SampleMode::Exhaustive, DEFAULT_BUDGET).is_err());
    }

    impl DeltaCensus {
        fn count(&self, l: u64) -> u64 {
            self.counts.get(&l).copied().unwrap_or(0)
        }
    }

    #[test]
    fn histogram_masses() {
        let f = field(101);
        let census = DeltaCensus::exhaustive(&f, DEFAULT_BUDGET).unwrap();
        let h = DeltaHistogram::from_census(&census, DEFAULT_RANGE, DEFAULT_BINS).unwrap();
        assert_eq!(h.bins(), 60);
        assert!((h.empirical.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let th: f64 = h.theoretical.iter().sum();
        assert!(th <= 1.0 + 1e-12 && th > 1.0 - 1e-12);
        assert!(!h.conjectural);
        let h3 = DeltaHistogram::from_census(&DeltaCensus::exhaustive(&field(3), DEFAULT_BUDGET).unwrap(), DEFAULT_RANGE, 60).unwrap();
        assert!(h3.conjectural);
    }

    #[test]
    fn theoretical_against_itself_is_zero() {
        let edges = uniform_edges(-0.3, 0.3, 60);
        let theoretical = theoretical_masses(&edges);
        let h = DeltaHistogram {
            p: 101,
            empirical: theoretical.clone(),
            theoretical,
            edges,
            mode: SampleMode::Exhaustive,
            samples: 0,
            conjectural: false,
        };
        assert!(sup_cdf_deviation(&h) < 1e-12);
    }

    #[test]
    fn sampled_is_reproducible() {
        let f = field(61);
        let a = DeltaCensus::sampled(&f, 150_000, 42).unwrap();
        let b = DeltaCensus::sampled(&f, 150_000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total, 150_000);
        assert_ne!(a, DeltaCensus::sampled(&f, 150_000, 43).unwrap());
    }
}
