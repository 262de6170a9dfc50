//! Sieve-backed integer arithmetic.
//!
//! Factorizations are kept with primes in non-increasing order, which is the
//! order in which the Schinzel–Szekeres function scans them: for
//! `n = p1 p2 ... pk` with `p1 >= p2 >= ... >= pk`,
//!
//! ```text
//! S(n) = max_j p1 ... p(j-1) * pj^2,   S(1) = 1.
//! ```

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sieve range.
pub const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

/// Environment variable capping the sieve size.
pub const SIEVE_LIMIT_ENV: &str = "DIVGRAPH_SIEVE_LIMIT";

/// Sieve size cap from the environment, falling back to [`DEFAULT_SIEVE_LIMIT`].
pub fn sieve_cap() -> u64 {
    std::env::var(SIEVE_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().replace('_', "").parse::<u64>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(DEFAULT_SIEVE_LIMIT)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `lcm(a, b)`, or `None` when it does not fit in 64 bits.
pub fn checked_lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Smallest prime factor, `P⁻(n)`. `P⁻(1)` is infinite and sorts above every
/// finite prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimeFloor {
    Finite(u64),
    Infinite,
}

impl PrimeFloor {
    /// `P⁻(n) >= z` with the convention that infinity passes every test.
    pub fn at_least(self, z: u64) -> bool {
        match self {
            PrimeFloor::Finite(p) => p >= z,
            PrimeFloor::Infinite => true,
        }
    }
}

impl fmt::Display for PrimeFloor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeFloor::Finite(p) => write!(f, "{p}"),
            PrimeFloor::Infinite => f.write_str("inf"),
        }
    }
}

/// A positive rational `num / den` kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let g = gcd(num, den).max(1);
        Ok(Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(n: u64) -> Self {
        Rational { num: n, den: 1 }
    }

    /// `num / den` without reduction, for floor and parity only.
    pub(crate) fn unreduced(num: u64, den: u64) -> Self {
        debug_assert!(den > 0);
        Rational { num, den }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn floor(&self) -> u64 {
        self.num / self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `e(t)`: 1 when `floor(t)` is odd, 0 when it is even. Exact.
pub fn parity_indicator(t: Rational) -> u8 {
    (t.floor() & 1) as u8
}

/// Prime decomposition of `n` with primes in non-increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    n: u64,
    /// `(prime, multiplicity)` with strictly decreasing primes.
    primes: Vec<(u64, u32)>,
}

impl Factorization {
    /// Builds a factorization from ascending primes with multiplicity.
    fn from_ascending(n: u64, ascending: &[u64]) -> Self {
        let mut primes: Vec<(u64, u32)> = Vec::new();
        for &p in ascending.iter().rev() {
            match primes.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => primes.push((p, 1)),
            }
        }
        Factorization { n, primes }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn primes(&self) -> &[(u64, u32)] {
        &self.primes
    }

    /// `p1 >= p2 >= ... >= pk`, repeated by multiplicity.
    pub fn flattened(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes
            .iter()
            .flat_map(|&(p, e)| std::iter::repeat(p).take(e as usize))
    }

    /// `Ω(n)`.
    pub fn omega(&self) -> u32 {
        self.primes.iter().map(|&(_, e)| e).sum()
    }

    /// `P⁻(n)`.
    pub fn smallest_prime(&self) -> PrimeFloor {
        self.primes
            .last()
            .map_or(PrimeFloor::Infinite, |&(p, _)| PrimeFloor::Finite(p))
    }

    /// `P(n)`, the largest prime factor; `None` for `n = 1`.
    pub fn largest_prime(&self) -> Option<u64> {
        self.primes.first().map(|&(p, _)| p)
    }

    pub fn profile(&self) -> Result<SsProfile> {
        let flat: Vec<u64> = self.flattened().collect();
        SsProfile::from_descending(self.n, &flat)
    }

    pub fn schinzel_szekeres(&self) -> Result<u64> {
        Ok(self.profile()?.s)
    }

    /// All divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.primes {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    /// `max d(i+1)/d(i)` over consecutive divisors. Requires `n >= 2`.
    pub fn max_divisor_ratio(&self) -> Result<Rational> {
        if self.n < 2 {
            return Err(Error::Precondition(
                "max divisor ratio needs n >= 2".into(),
            ));
        }
        let divs = self.divisors();
        let mut best = (divs[1], divs[0]);
        for w in divs.windows(2).skip(1) {
            // w[1]/w[0] > best.0/best.1
            if (w[1] as u128) * (best.1 as u128) > (best.0 as u128) * (w[0] as u128) {
                best = (w[1], w[0]);
            }
        }
        Rational::new(best.0, best.1)
    }
}

/// The prefix-product scan behind `S(n)`, split into the pieces the set
/// definitions need.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsProfile {
    /// `S(n)`.
    pub s: u64,
    /// `max_{j<k} p1 ... p(j-1) pj^2`; 0 when `k <= 1` (empty maximum).
    pub s_lower: u64,
    /// The `j = k` term `p1 ... p(k-1) pk^2 = n * P⁻(n)`; 1 for `n = 1`.
    pub s_last: u64,
}

impl SsProfile {
    fn from_descending(n: u64, flat: &[u64]) -> Result<Self> {
        if flat.is_empty() {
            return Ok(SsProfile {
                s: 1,
                s_lower: 0,
                s_last: 1,
            });
        }
        let k = flat.len();
        let mut prefix = 1u64;
        let mut s_lower = 0u64;
        let mut s_last = 0u64;
        for (j, &p) in flat.iter().enumerate() {
            let term = prefix
                .checked_mul(p)
                .and_then(|v| v.checked_mul(p))
                .ok_or(Error::Overflow("S(n)"))?;
            if j + 1 < k {
                s_lower = s_lower.max(term);
                prefix *= p;
            } else {
                s_last = term;
            }
        }
        debug_assert_eq!(prefix * flat[k - 1], n);
        Ok(SsProfile {
            s: s_lower.max(s_last),
            s_lower,
            s_last,
        })
    }
}

/// Smallest-prime-factor table. Read-only after construction.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    /// Sieve covering `1..=limit`.
    pub fn new(limit: u64) -> Result<Self> {
        if limit > u32::MAX as u64 {
            return Err(Error::OutOfRange {
                value: limit,
                reason: "sieve limit must fit in 32 bits",
            });
        }
        let limit = limit.max(1) as usize;
        let mut spf = vec![0u32; limit + 1];
        spf[1] = 1;
        let mut i = 2usize;
        while i <= limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                if let Some(start) = i.checked_mul(i) {
                    let mut j = start;
                    while j <= limit {
                        if spf[j] == 0 {
                            spf[j] = i as u32;
                        }
                        j += i;
                    }
                }
            }
            i += 1;
        }
        Ok(Sieve { spf })
    }

    /// Sieve covering `1..=x`, refused when `x` exceeds the configured cap.
    pub fn for_bound(x: u64) -> Result<Self> {
        let cap = sieve_cap();
        if x > cap {
            return Err(Error::BeyondSieve { x, limit: cap });
        }
        Sieve::new(x)
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Errors unless `x` lies inside the sieve.
    pub fn require(&self, x: u64) -> Result<()> {
        if x > self.limit() {
            Err(Error::BeyondSieve {
                x,
                limit: self.limit(),
            })
        } else {
            Ok(())
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n <= self.limit() {
            n >= 2 && self.spf[n as usize] as u64 == n
        } else {
            let f = trial_division(n);
            f.primes.len() == 1 && f.primes[0].1 == 1
        }
    }

    /// Fills `buf` with the ascending prime factors of `n` and returns the count.
    fn ascending_into(&self, mut n: u64, buf: &mut [u64; 64]) -> usize {
        let mut k = 0;
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            buf[k] = p;
            k += 1;
            n /= p;
        }
        k
    }

    pub fn factor(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::OutOfRange {
                value: 0,
                reason: "n must be positive",
            });
        }
        if n > self.limit() {
            return Ok(trial_division(n));
        }
        let mut buf = [0u64; 64];
        let k = self.ascending_into(n, &mut buf);
        Ok(Factorization::from_ascending(n, &buf[..k]))
    }

    /// `S(n)` together with its prefix pieces. Allocation-free inside the sieve.
    pub fn profile(&self, n: u64) -> Result<SsProfile> {
        if n == 0 {
            return Err(Error::OutOfRange {
                value: 0,
                reason: "n must be positive",
            });
        }
        if n > self.limit() {
            return trial_division(n).profile();
        }
        let mut buf = [0u64; 64];
        let k = self.ascending_into(n, &mut buf);
        buf[..k].reverse();
        SsProfile::from_descending(n, &buf[..k])
    }

    /// `S(n)`.
    pub fn schinzel_szekeres(&self, n: u64) -> Result<u64> {
        Ok(self.profile(n)?.s)
    }

    /// `P⁻(n)`.
    pub fn smallest_prime(&self, n: u64) -> Result<PrimeFloor> {
        if n == 1 {
            return Ok(PrimeFloor::Infinite);
        }
        if n >= 2 && n <= self.limit() {
            return Ok(PrimeFloor::Finite(self.spf[n as usize] as u64));
        }
        Ok(self.factor(n)?.smallest_prime())
    }

    /// `P(n)`; `None` for `n = 1`.
    pub fn largest_prime(&self, n: u64) -> Result<Option<u64>> {
        Ok(self.factor(n)?.largest_prime())
    }

    pub fn max_divisor_ratio(&self, n: u64) -> Result<Rational> {
        self.factor(n)?.max_divisor_ratio()
    }

    /// True iff every consecutive divisor ratio of `n` is at most `z`.
    pub fn is_z_dense(&self, n: u64, z: Rational) -> Result<bool> {
        Ok(self.max_divisor_ratio(n)? <= z)
    }

    pub fn divisors(&self, n: u64) -> Result<Vec<u64>> {
        Ok(self.factor(n)?.divisors())
    }
}

/// Factorization by trial division, for isolated queries above the sieve.
pub fn trial_division(n: u64) -> Factorization {
    let mut ascending = Vec::new();
    let mut m = n;
    for p in [2u64, 3, 5] {
        while m % p == 0 {
            ascending.push(p);
            m /= p;
        }
    }
    // 30-wheel
    const STEPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut d = 7u64;
    let mut i = 0;
    while d <= m / d {
        while m % d == 0 {
            ascending.push(d);
            m /= d;
        }
        d += STEPS[i];
        i = (i + 1) % 8;
    }
    if m > 1 {
        ascending.push(m);
    }
    Factorization::from_ascending(n, &ascending)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sieve() -> Sieve {
        Sieve::new(100_000).unwrap()
    }

    #[test]
    fn factor_small() {
        let s = sieve();
        let one = s.factor(1).unwrap();
        assert!(one.primes().is_empty());
        assert_eq!(one.omega(), 0);
        assert_eq!(one.smallest_prime(), PrimeFloor::Infinite);
        let twelve = s.factor(12).unwrap();
        assert_eq!(twelve.primes(), &[(3, 1), (2, 2)]);
        assert_eq!(twelve.flattened().collect::<Vec<_>>(), vec![3, 2, 2]);
        assert!(s.factor(0).is_err());
    }

    #[test]
    fn factor_above_sieve_uses_trial_division() {
        let s = Sieve::new(1000).unwrap();
        // 9999991 is prime (checked by the trial-division loop below)
        let f = s.factor(9_999_991).unwrap();
        let mut is_prime = true;
        let mut d = 2u64;
        while d * d <= 9_999_991 {
            if 9_999_991 % d == 0 {
                is_prime = false;
                break;
            }
            d += 1;
        }
        assert!(is_prime);
        assert_eq!(f.primes(), &[(9_999_991, 1)]);
        let g = s.factor(600_851_475_143).unwrap();
        assert_eq!(g.primes(), &[(6857, 1), (1471, 1), (839, 1), (71, 1)]);
    }

    #[test]
    fn schinzel_szekeres_examples() {
        let s = sieve();
        assert_eq!(s.schinzel_szekeres(1).unwrap(), 1);
        assert_eq!(s.schinzel_szekeres(12).unwrap(), 24);
        assert_eq!(s.schinzel_szekeres(97).unwrap(), 97 * 97);
        assert_eq!(s.schinzel_szekeres(4).unwrap(), 8);
        assert_eq!(s.schinzel_szekeres(6).unwrap(), 12);
        let p = s.profile(12).unwrap();
        assert_eq!((p.s_lower, p.s_last), (12, 24));
    }

    #[test]
    fn schinzel_szekeres_overflow_is_signalled() {
        let s = Sieve::new(10).unwrap();
        // largest prime below 2^64
        let p = 18_446_744_073_709_551_557u64;
        assert_eq!(s.schinzel_szekeres(p), Err(Error::Overflow("S(n)")));
    }

    #[test]
    fn divisor_ratio_examples() {
        let s = sieve();
        assert_eq!(s.max_divisor_ratio(12).unwrap(), Rational::integer(2));
        assert_eq!(s.max_divisor_ratio(13).unwrap(), Rational::integer(13));
        assert_eq!(s.max_divisor_ratio(1024).unwrap(), Rational::integer(2));
        assert_eq!(s.max_divisor_ratio(10).unwrap(), Rational::new(5, 2).unwrap());
        assert!(s.max_divisor_ratio(1).is_err());
    }

    #[test]
    fn z_dense_examples() {
        let s = sieve();
        assert!(s.is_z_dense(12, Rational::integer(2)).unwrap());
        assert!(!s.is_z_dense(13, Rational::integer(12)).unwrap());
        let r = s.max_divisor_ratio(10).unwrap();
        assert!(s.is_z_dense(10, r).unwrap());
        assert!(!s.is_z_dense(10, Rational::new(49, 20).unwrap()).unwrap());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_indicator(Rational::new(10, 6).unwrap()), 1);
        assert_eq!(parity_indicator(Rational::new(5, 2).unwrap()), 0);
        assert_eq!(parity_indicator(Rational::integer(1)), 1);
        assert_eq!(parity_indicator(Rational::new(1, 3).unwrap()), 0);
    }

    #[test]
    fn prime_floor_orders_infinity_last() {
        assert!(PrimeFloor::Finite(u64::MAX) < PrimeFloor::Infinite);
        assert!(PrimeFloor::Infinite.at_least(u64::MAX));
        assert!(!PrimeFloor::Finite(2).at_least(3));
    }

    // S(n) = n * max ratio, exactly, for every n up to the test bound.
    #[test]
    fn dense_divisor_formula_exhaustive() {
        let s = sieve();
        for n in 2..=20_000u64 {
            let f = s.factor(n).unwrap();
            let sn = f.schinzel_szekeres().unwrap();
            let r = f.max_divisor_ratio().unwrap();
            assert_eq!(sn as u128 * r.den() as u128, n as u128 * r.num() as u128, "n = {n}");
            assert!(sn >= 2 * n);
            assert_eq!(s.profile(n).unwrap().s, sn);
        }
    }

    #[test]
    fn factor_round_trip_exhaustive() {
        let s = sieve();
        for n in 1..=100_000u64 {
            let f = s.factor(n).unwrap();
            let flat: Vec<u64> = f.flattened().collect();
            assert_eq!(flat.iter().product::<u64>(), n);
            assert!(flat.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn sieve_agrees_with_trial_division_on_random_inputs() {
        use rand::{Rng, SeedableRng};
        let s = sieve();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let n = rng.gen_range(1..=s.limit());
            assert_eq!(s.factor(n).unwrap(), trial_division(n));
        }
    }

    proptest! {
        #[test]
        fn rational_order_matches_cross_multiplication(a in 1u64..1_000_000, b in 1u64..1_000_000,
                                                       c in 1u64..1_000_000, d in 1u64..1_000_000) {
            let x = Rational::new(a, b).unwrap();
            let y = Rational::new(c, d).unwrap();
            prop_assert_eq!(x.cmp(&y), (a as u128 * d as u128).cmp(&(c as u128 * b as u128)));
            prop_assert_eq!(x.floor(), a / b);
        }

        #[test]
        fn trial_division_round_trip(n in 1u64..u64::MAX / 1_000_000) {
            let f = trial_division(n);
            let prod: u128 = f.flattened().map(|p| p as u128).product();
            prop_assert_eq!(prod, n as u128);
        }
    }
}
