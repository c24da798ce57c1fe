//! Prime-field arithmetic and the quadratic character.
//!
//! Elements are canonical integers `0..p`. Products go through `u128`, so any
//! odd prime below 2^61 is supported. Fields up to [`TABLE_LIMIT`] carry a
//! bit table of the squares `Q_p = {u^2 : u in F_p}`; larger fields evaluate the
//! character with Euler's criterion.

use crate::bits::BitRow;
use crate::error::{Error, Result};
use std::ops::Mul;

/// Largest modulus for which the residue table is materialized (8 MiB of bits).
pub const TABLE_LIMIT: u64 = 1 << 26;

/// Exclusive upper bound on supported moduli.
pub const MODULUS_LIMIT: u64 = 1 << 61;

/// Value of the quadratic character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum Chi {
    NonResidue = -1,
    Zero = 0,
    Residue = 1,
}

impl Chi {
    #[inline]
    pub fn value(self) -> i64 {
        self as i8 as i64
    }
}

impl Mul for Chi {
    type Output = Chi;

    fn mul(self, rhs: Chi) -> Chi {
        match self.value() * rhs.value() {
            1 => Chi::Residue,
            0 => Chi::Zero,
            _ => Chi::NonResidue,
        }
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are a proven
/// witness set for every n < 3.3 * 10^24, hence for all of `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes in `lo..=hi`, ascending.
pub fn primes_in(lo: u64, hi: u64) -> impl Iterator<Item = u64> {
    (lo..=hi).filter(|&n| is_prime(n))
}

/// An odd prime field `F_p` with its canonical non-square.
#[derive(Clone)]
pub struct PrimeField {
    p: u64,
    squares: Option<BitRow>,
    lambda: u64,
}

impl std::fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrimeField")
            .field("p", &self.p)
            .field("lambda", &self.lambda)
            .field("table", &self.squares.is_some())
            .finish()
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        Self::with_table_limit(p, TABLE_LIMIT)
    }

    /// Builds the field, materializing the residue table only if `p <= table_limit`.
    pub fn with_table_limit(p: u64, table_limit: u64) -> Result<Self> {
        if !(3..MODULUS_LIMIT).contains(&p) {
            return Err(if p == 2 {
                Error::EvenModulus(p)
            } else {
                Error::ModulusOutOfRange(p)
            });
        }
        if p.is_multiple_of(2) {
            return Err(Error::EvenModulus(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let squares = (p <= table_limit.min(TABLE_LIMIT)).then(|| {
            let len = p as usize;
            // (p - u)^2 = u^2, so half the range suffices.
            BitRow::from_indices(len, (0..=p / 2).map(|u| mul_mod(u, u, p) as usize))
        });
        let mut field = PrimeField {
            p,
            squares,
            lambda: 0,
        };
        field.lambda = (2..p)
            .find(|&u| field.chi(u) == Chi::NonResidue)
            .expect("every odd prime field has a non-square");
        Ok(field)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Smallest non-square in `F_p^*`.
    #[inline]
    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    #[inline]
    pub fn has_table(&self) -> bool {
        self.squares.is_some()
    }

    /// Indicator row of `Q_p` (including 0), when materialized.
    #[inline]
    pub fn squares(&self) -> Option<&BitRow> {
        self.squares.as_ref()
    }

    #[inline]
    pub fn is_one_mod_four(&self) -> bool {
        self.p % 4 == 1
    }

    pub fn check(&self, u: u64) -> Result<u64> {
        if u < self.p {
            Ok(u)
        } else {
            Err(Error::ElementOutOfRange {
                value: u,
                p: self.p,
            })
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.p < 1 << 32 {
            a * b % self.p
        } else {
            mul_mod(a, b, self.p)
        }
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.p)
    }

    /// Canonical representative of an arbitrary signed integer.
    #[inline]
    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    /// Quadratic character of `u` (which must be canonical).
    #[inline]
    pub fn chi(&self, u: u64) -> Chi {
        debug_assert!(u < self.p);
        match &self.squares {
            Some(table) => Self::chi_from_table(table, u),
            None => self.chi_euler(u),
        }
    }

    /// Table lookup path; `None` if the field has no table.
    pub fn chi_table(&self, u: u64) -> Option<Chi> {
        self.squares.as_ref().map(|t| Self::chi_from_table(t, u))
    }

    #[inline]
    fn chi_from_table(table: &BitRow, u: u64) -> Chi {
        if u == 0 {
            Chi::Zero
        } else if table.get(u as usize) {
            Chi::Residue
        } else {
            Chi::NonResidue
        }
    }

    /// Euler's criterion `u^((p-1)/2)`.
    pub fn chi_euler(&self, u: u64) -> Chi {
        if u == 0 {
            return Chi::Zero;
        }
        match pow_mod(u, (self.p - 1) / 2, self.p) {
            1 => Chi::Residue,
            r => {
                debug_assert_eq!(r, self.p - 1);
                Chi::NonResidue
            }
        }
    }

    /// Whether `u` lies in `Q_p` (0 counts as a square).
    #[inline]
    pub fn is_square(&self, u: u64) -> bool {
        self.chi(u) != Chi::NonResidue
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn squares_by_enumeration(p: u64) -> Vec<u64> {
        let mut v: Vec<u64> = (0..p).map(|j| j * j % p).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    #[test]
    fn build_p7() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.lambda(), 3);
        let sq: Vec<u64> = f.squares().unwrap().iter_ones().map(|u| u as u64).collect();
        assert_eq!(sq, squares_by_enumeration(7));
        assert_eq!(sq, vec![0, 1, 2, 4]);
        assert_eq!(f.squares().unwrap().count_ones(), 4);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(PrimeField::new(9).unwrap_err(), Error::NotPrime(9));
        assert_eq!(PrimeField::new(4).unwrap_err(), Error::EvenModulus(4));
        assert_eq!(PrimeField::new(2).unwrap_err(), Error::EvenModulus(2));
        assert_eq!(PrimeField::new(1).unwrap_err(), Error::ModulusOutOfRange(1));
        assert_eq!(
            PrimeField::new(1 << 61).unwrap_err(),
            Error::ModulusOutOfRange(1 << 61)
        );
    }

    #[test]
    fn chi_examples() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.chi(0), Chi::Zero);
        assert_eq!(f7.chi(3), Chi::NonResidue);
        let f13 = PrimeField::new(13).unwrap();
        assert_eq!(f13.chi(12), Chi::Residue);
    }

    #[test]
    fn primality_against_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        // strong pseudoprimes to several small bases
        for n in [3_215_031_751u64, 2_152_302_898_747, 3_474_749_660_383, 341_550_071_728_321] {
            assert!(!is_prime(n));
        }
        assert!(is_prime((1 << 61) - 1));
    }

    #[test]
    fn table_invariants_small_primes() {
        for p in primes_in(3, 400) {
            let f = PrimeField::new(p).unwrap();
            let sq = f.squares().unwrap();
            assert_eq!(sq.count_ones() as u64, p.div_ceil(2));
            assert!(sq.get(0));
            assert!(!sq.get(f.lambda() as usize));
            assert!((1..f.lambda()).all(|u| sq.get(u as usize)));
            let symmetric = (1..p).all(|u| sq.get(u as usize) == sq.get((p - u) as usize));
            assert_eq!(symmetric, p % 4 == 1);
            assert_eq!((0..p).map(|u| f.chi(u).value()).sum::<i64>(), 0);
        }
    }

    #[test]
    fn multiplicativity_exhaustive() {
        for p in primes_in(3, 101) {
            let f = PrimeField::new(p).unwrap();
            for u in 0..p {
                for v in 0..p {
                    assert_eq!(f.chi(u) * f.chi(v), f.chi(f.mul(u, v)));
                }
            }
        }
    }

    #[test]
    fn large_field_has_no_table() {
        let p = (1u64 << 61) - 1;
        let f = PrimeField::new(p).unwrap();
        assert!(!f.has_table());
        assert_eq!(f.chi(f.mul(12345, 12345)), Chi::Residue);
        assert_eq!(f.chi(p - 1), Chi::NonResidue); // p = 3 mod 4
        assert_eq!(f.chi_euler(f.lambda()), Chi::NonResidue);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn table_and_euler_agree(pi in 0usize..400, u in any::<u64>()) {
            thread_local! {
                static FIELDS: Vec<PrimeField> =
                    primes_in(3, 20_000).map(|p| PrimeField::new(p).unwrap()).collect();
            }
            FIELDS.with(|fields| {
                let f = &fields[pi % fields.len()];
                let u = u % f.p();
                assert_eq!(f.chi_table(u).unwrap(), f.chi_euler(u));
            });
        }
    }
}
