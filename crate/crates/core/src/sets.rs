//! The sets `A(x) = {n : S(n) <= x}`, `B(x)` (the integers `<= x` outside
//! `A(x)` that are minimal for divisibility) and `A(x, z, t)`, with the exact
//! sieve identities that tie them together.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::CompensatedSum;
use crate::error::{Error, Result};
use crate::number::{parity_indicator, Rational, Sieve, SsProfile};

fn require_positive(v: u64, what: &'static str) -> Result<()> {
    if v == 0 {
        Err(Error::OutOfRange {
            value: 0,
            reason: what,
        })
    } else {
        Ok(())
    }
}

fn b_member(n: u64, x: u64, p: &SsProfile) -> bool {
    n >= 2 && n <= x && p.s_lower <= x && x < p.s_last
}

/// `n ∈ A(x)`.
pub fn in_a(sieve: &Sieve, n: u64, x: u64) -> Result<bool> {
    require_positive(n, "n must be positive")?;
    require_positive(x, "x must be positive")?;
    Ok(sieve.schinzel_szekeres(n)? <= x)
}

/// `n ∈ B(x)`: `2 <= n <= x`, every proper prefix term is `<= x` and the last
/// term `n P⁻(n)` exceeds `x`.
pub fn in_b(sieve: &Sieve, n: u64, x: u64) -> Result<bool> {
    require_positive(n, "n must be positive")?;
    require_positive(x, "x must be positive")?;
    if n < 2 || n > x {
        return Ok(false);
    }
    Ok(b_member(n, x, &sieve.profile(n)?))
}

/// `n ∈ A(x, z, t)`: `n <= x`, `P⁻(n) >= z` and `S(n) <= n t`.
pub fn in_a_xzt(sieve: &Sieve, n: u64, x: u64, z: u64, t: u64) -> Result<bool> {
    require_positive(n, "n must be positive")?;
    require_positive(x, "x must be positive")?;
    require_positive(z, "z must be positive")?;
    require_positive(t, "t must be positive")?;
    let nt = n.checked_mul(t).ok_or(Error::Overflow("n * t"))?;
    if n > x || !sieve.smallest_prime(n)?.at_least(z) {
        return Ok(false);
    }
    Ok(sieve.schinzel_szekeres(n)? <= nt)
}

pub fn enumerate_a(sieve: &Sieve, x: u64) -> Result<Vec<u64>> {
    require_positive(x, "x must be positive")?;
    sieve.require(x)?;
    let mut out = Vec::new();
    for n in 1..=x {
        if sieve.profile(n)?.s <= x {
            out.push(n);
        }
    }
    Ok(out)
}

pub fn enumerate_b(sieve: &Sieve, x: u64) -> Result<Vec<u64>> {
    require_positive(x, "x must be positive")?;
    sieve.require(x)?;
    let mut out = Vec::new();
    for n in 2..=x {
        if b_member(n, x, &sieve.profile(n)?) {
            debug_assert!((n as u128) * (n as u128) > x as u128);
            out.push(n);
        }
    }
    Ok(out)
}

pub fn count_a(sieve: &Sieve, x: u64) -> Result<u64> {
    Ok(enumerate_a(sieve, x)?.len() as u64)
}

pub fn count_b(sieve: &Sieve, x: u64) -> Result<u64> {
    Ok(enumerate_b(sieve, x)?.len() as u64)
}

/// `A(x, z, t)` as an ascending list.
pub fn enumerate_a_xzt(sieve: &Sieve, x: u64, z: u64, t: u64) -> Result<Vec<u64>> {
    require_positive(x, "x must be positive")?;
    sieve.require(x)?;
    let mut out = Vec::new();
    for n in 1..=x {
        if in_a_xzt(sieve, n, x, z, t)? {
            out.push(n);
        }
    }
    Ok(out)
}

/// `{m : q S(m) <= x, P(m) <= y}`, i.e. `A(x/q, y)` for a real bound `x/q`.
pub fn enumerate_a_scaled(sieve: &Sieve, x: u64, q: u64, y: u64) -> Result<Vec<u64>> {
    require_positive(q, "q must be positive")?;
    let top = x / q;
    sieve.require(top)?;
    let mut out = Vec::new();
    for m in 1..=top {
        let s = sieve.profile(m)?.s;
        if (s as u128) * (q as u128) > x as u128 {
            continue;
        }
        let largest = sieve.largest_prime(m)?.unwrap_or(1);
        if largest <= y {
            out.push(m);
        }
    }
    Ok(out)
}

/// `A(x, y) = {n ∈ A(x) : P(n) <= y}`.
pub fn enumerate_a_xy(sieve: &Sieve, x: u64, y: u64) -> Result<Vec<u64>> {
    enumerate_a_scaled(sieve, x, 1, y)
}

/// The multiset `{1} ∪ ⋃_{p <= min(y, √x)} p·A(x/p, p)`, in block order.
pub fn decompose_a_xy(sieve: &Sieve, x: u64, y: u64) -> Result<Vec<u64>> {
    require_positive(x, "x must be positive")?;
    let mut out = vec![1u64];
    let mut p = 2u64;
    while p <= y && p.saturating_mul(p) <= x {
        if sieve.is_prime(p) {
            out.extend(enumerate_a_scaled(sieve, x, p, p)?.into_iter().map(|m| m * p));
        }
        p += 1;
    }
    Ok(out)
}

/// Every divisor of `n` lying in `B(x)`.
pub fn b_divisors(sieve: &Sieve, n: u64, x: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for d in sieve.divisors(n)? {
        if in_b(sieve, d, x)? {
            out.push(d);
        }
    }
    Ok(out)
}

/// The unique element of `B(x)` dividing `n`, for `n <= x` outside `A(x)`.
///
/// Built as `p1 ... pj` with `j` the first index whose prefix term
/// `p1 ... p(j-1) pj^2` exceeds `x`.
pub fn unique_b_divisor(sieve: &Sieve, n: u64, x: u64) -> Result<u64> {
    require_positive(n, "n must be positive")?;
    if n > x {
        return Err(Error::Precondition(format!("n = {n} exceeds x = {x}")));
    }
    let f = sieve.factor(n)?;
    let mut prefix = 1u64;
    let mut found = None;
    for p in f.flattened() {
        let term = (prefix as u128) * (p as u128) * (p as u128);
        prefix *= p;
        if term > x as u128 {
            found = Some(prefix);
            break;
        }
    }
    let b = found.ok_or_else(|| Error::Precondition(format!("{n} lies in A({x})")))?;
    #[cfg(debug_assertions)]
    {
        let all = b_divisors(sieve, n, x)?;
        debug_assert_eq!(all, vec![b], "B({x})-divisors of {n}");
    }
    Ok(b)
}

/// One row of an identity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSweepRow {
    pub x: u64,
    pub count_a: u64,
    pub count_b: u64,
    pub harmonic_b: f64,
    pub floor_identity_residual: i64,
    pub parity_identity_residual: i64,
}

/// Everything a single pass over `n <= x` yields.
#[derive(Debug, Clone, PartialEq)]
pub struct SetStats {
    pub x: u64,
    pub count_a: u64,
    pub count_b: u64,
    pub harmonic_b: f64,
    /// `Σ_{b ∈ B(x)} floor(x/b)`.
    pub floor_sum: u64,
    /// `Σ_{b ∈ B(x)} e(x/b)`.
    pub parity_sum: u64,
}

impl SetStats {
    /// `floor(x) - A(x) - Σ floor(x/b)`.
    pub fn floor_residual(&self) -> i64 {
        self.x as i64 - self.count_a as i64 - self.floor_sum as i64
    }

    /// `A(x) - Σ e(x/b) + e(x)`.
    pub fn parity_residual(&self) -> i64 {
        let ex = parity_indicator(Rational::integer(self.x)) as i64;
        self.count_a as i64 - self.parity_sum as i64 + ex
    }

    pub fn row(&self) -> SetSweepRow {
        SetSweepRow {
            x: self.x,
            count_a: self.count_a,
            count_b: self.count_b,
            harmonic_b: self.harmonic_b,
            floor_identity_residual: self.floor_residual(),
            parity_identity_residual: self.parity_residual(),
        }
    }
}

fn accumulate(x: u64, count_a: u64, bs: impl Iterator<Item = u64>) -> SetStats {
    let mut count_b = 0;
    let mut floor_sum = 0;
    let mut parity_sum = 0;
    let mut harmonic = CompensatedSum::default();
    for b in bs {
        count_b += 1;
        floor_sum += x / b;
        // x/b as an exact rational; never a float
        parity_sum += parity_indicator(Rational::unreduced(x, b)) as u64;
        harmonic.add(1.0 / b as f64);
    }
    SetStats {
        x,
        count_a,
        count_b,
        harmonic_b: harmonic.value(),
        floor_sum,
        parity_sum,
    }
}

/// One pass over `n = 1..=x`.
pub fn set_stats(sieve: &Sieve, x: u64) -> Result<SetStats> {
    require_positive(x, "x must be positive")?;
    sieve.require(x)?;
    let mut count_a = 0;
    let mut bs = Vec::new();
    for n in 1..=x {
        let p = sieve.profile(n)?;
        if p.s <= x {
            count_a += 1;
        }
        if b_member(n, x, &p) {
            bs.push(n);
        }
    }
    Ok(accumulate(x, count_a, bs.into_iter()))
}

pub fn check_floor_identity(sieve: &Sieve, x: u64) -> Result<i64> {
    Ok(set_stats(sieve, x)?.floor_residual())
}

/// Parity identity residual. Only meaningful for `x >= 2`; at `x = 1` the set
/// `B(1)` is empty and the residual is 2.
pub fn check_parity_identity(sieve: &Sieve, x: u64) -> Result<i64> {
    Ok(set_stats(sieve, x)?.parity_residual())
}

/// Per-`n` data for range sweeps: `S(n)` and the `x`-interval on which `n`
/// belongs to `B(x)`.
struct SweepTables {
    /// `a_cum[v] = #{n : S(n) <= v}` for `v <= to`.
    a_cum: Vec<u64>,
    /// `n ∈ B(x)` iff `enter[n] <= x < leave[n]`.
    enter: Vec<u64>,
    leave: Vec<u64>,
}

impl SweepTables {
    fn build(sieve: &Sieve, to: u64) -> Result<Self> {
        sieve.require(to)?;
        let len = to as usize + 1;
        let mut a_hits = vec![0u64; len];
        let mut enter = vec![u64::MAX; len];
        let mut leave = vec![0u64; len];
        for n in 1..=to {
            let p = sieve.profile(n)?;
            if p.s <= to {
                a_hits[p.s as usize] += 1;
            }
            if n >= 2 {
                enter[n as usize] = n.max(p.s_lower);
                leave[n as usize] = p.s_last;
            }
        }
        let mut acc = 0;
        let a_cum = a_hits
            .into_iter()
            .map(|h| {
                acc += h;
                acc
            })
            .collect();
        Ok(SweepTables { a_cum, enter, leave })
    }

    fn chunk(&self, lo: u64, hi: u64) -> Vec<SetStats> {
        let mut active: BTreeSet<u64> = (2..=lo)
            .filter(|&n| self.enter[n as usize] <= lo && lo < self.leave[n as usize])
            .collect();
        // entries keyed by entering x
        let mut entering: Vec<Vec<u64>> = vec![Vec::new(); (hi - lo + 1) as usize];
        for n in 2..=hi {
            let e = self.enter[n as usize];
            if e > lo && e <= hi && e < self.leave[n as usize] {
                entering[(e - lo) as usize].push(n);
            }
        }
        let mut leaving: Vec<Vec<u64>> = vec![Vec::new(); (hi - lo + 1) as usize];
        for n in 2..=hi {
            let (e, l) = (self.enter[n as usize], self.leave[n as usize]);
            if l > lo && l <= hi && e < l {
                leaving[(l - lo) as usize].push(n);
            }
        }
        let mut out = Vec::with_capacity((hi - lo + 1) as usize);
        for x in lo..=hi {
            let i = (x - lo) as usize;
            if x > lo {
                for n in &leaving[i] {
                    active.remove(n);
                }
                active.extend(entering[i].iter().copied());
            }
            out.push(accumulate(x, self.a_cum[x as usize], active.iter().copied()));
        }
        out
    }
}

/// Identity sweep over every integer `x` in `[from, to]`.
///
/// Membership in `A(x)` and `B(x)` is tracked by enumeration as `x` grows; the
/// identities are only evaluated, never used. With `threads > 1` the range is
/// split into contiguous chunks, one accumulator per worker.
pub fn sweep_identities(sieve: &Sieve, from: u64, to: u64, threads: usize) -> Result<Vec<SetSweepRow>> {
    if from == 0 || from > to {
        return Err(Error::Precondition(format!("bad sweep range [{from}, {to}]")));
    }
    let tables = SweepTables::build(sieve, to)?;
    let threads = threads.max(1);
    let span = to - from + 1;
    let chunks = if threads == 1 { 1 } else { (threads as u64 * 4).min(span) };
    let step = span.div_ceil(chunks);
    let ranges: Vec<(u64, u64)> = (0..chunks)
        .map(|c| (from + c * step, (from + (c + 1) * step - 1).min(to)))
        .filter(|(lo, hi)| lo <= hi)
        .collect();
    let stats: Vec<SetStats> = if threads == 1 {
        ranges.iter().flat_map(|&(lo, hi)| tables.chunk(lo, hi)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Precondition(e.to_string()))?;
        pool.install(|| {
            ranges
                .par_iter()
                .map(|&(lo, hi)| tables.chunk(lo, hi))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect()
        })
    };
    Ok(stats.iter().map(SetStats::row).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve() -> Sieve {
        Sieve::new(20_000).unwrap()
    }

    #[test]
    fn membership_examples() {
        let s = sieve();
        assert!(in_a(&s, 1, 1).unwrap());
        assert!(in_a(&s, 4, 10).unwrap());
        assert!(!in_a(&s, 6, 10).unwrap());
        assert!(in_b(&s, 5, 10).unwrap());
        assert!(in_b(&s, 6, 10).unwrap());
        assert!(!in_b(&s, 4, 10).unwrap());
        for x in 1..50 {
            assert!(!in_b(&s, 1, x).unwrap());
        }
        assert!(in_a(&s, 0, 5).is_err());
    }

    #[test]
    fn primes_in_b_are_exactly_those_above_root_x() {
        let s = sieve();
        for x in 2..=2000u64 {
            for p in (2..=x).filter(|&p| s.is_prime(p)) {
                assert_eq!(in_b(&s, p, x).unwrap(), p * p > x, "p = {p}, x = {x}");
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let s = sieve();
        assert_eq!(enumerate_a(&s, 10).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(enumerate_b(&s, 10).unwrap(), vec![5, 6, 7, 8, 9]);
        assert_eq!(count_a(&s, 1).unwrap(), 1);
        assert!(enumerate_b(&s, 1).unwrap().is_empty());
        assert!(matches!(enumerate_a(&s, 20_001), Err(Error::BeyondSieve { .. })));
    }

    #[test]
    fn xzt_examples() {
        let s = sieve();
        for (x, z, t) in [(1, 1, 1), (10, 7, 3), (100, 100, 1)] {
            assert!(in_a_xzt(&s, 1, x, z, t).unwrap());
        }
        assert!(in_a_xzt(&s, 12, 20, 2, 2).unwrap());
        assert!(!in_a_xzt(&s, 12, 20, 3, 2).unwrap());
        assert!(!in_a_xzt(&s, 12, 11, 2, 2).unwrap());
        assert_eq!(in_a_xzt(&s, u64::MAX, u64::MAX, 1, 2), Err(Error::Overflow("n * t")));
        // t = 1 only admits n = 1; t large and z = 1 admits everything up to x
        assert_eq!(enumerate_a_xzt(&s, 50, 1, 1).unwrap(), vec![1]);
        assert_eq!(enumerate_a_xzt(&s, 50, 1, 50).unwrap().len(), 50);
    }

    #[test]
    fn unique_b_divisor_examples() {
        let s = sieve();
        assert_eq!(unique_b_divisor(&s, 10, 10).unwrap(), 5);
        assert_eq!(unique_b_divisor(&s, 8, 10).unwrap(), 8);
        assert_eq!(unique_b_divisor(&s, 7, 10).unwrap(), 7);
        assert!(unique_b_divisor(&s, 4, 10).is_err());
        assert!(unique_b_divisor(&s, 11, 10).is_err());
    }

    #[test]
    fn identity_examples() {
        let s = sieve();
        let st = set_stats(&s, 10).unwrap();
        assert_eq!((st.count_a, st.count_b, st.floor_sum, st.parity_sum), (4, 5, 6, 4));
        assert_eq!(check_floor_identity(&s, 10).unwrap(), 0);
        assert_eq!(check_floor_identity(&s, 1).unwrap(), 0);
        assert_eq!(check_floor_identity(&s, 100).unwrap(), 0);
        assert_eq!(check_parity_identity(&s, 10).unwrap(), 0);
        assert_eq!(check_parity_identity(&s, 1000).unwrap(), 0);
        // excluded boundary: B(1) is empty, e(1) = 1, A(1) = 1
        assert_eq!(check_parity_identity(&s, 1).unwrap(), 2);
    }

    #[test]
    fn sweep_matches_single_passes() {
        let s = sieve();
        let rows = sweep_identities(&s, 1, 3000, 1).unwrap();
        let par = sweep_identities(&s, 1, 3000, 4).unwrap();
        assert_eq!(rows, par);
        for r in rows.iter().step_by(37) {
            let st = set_stats(&s, r.x).unwrap();
            assert_eq!(r, &st.row());
        }
        assert!(rows.iter().all(|r| r.floor_identity_residual == 0));
        assert!(rows.iter().skip(1).all(|r| r.parity_identity_residual == 0));
    }

    #[test]
    fn nontrivial_members_of_a_are_at_most_half_x() {
        let s = sieve();
        for x in [2u64, 3, 10, 99, 1000, 4097] {
            for n in enumerate_a(&s, x).unwrap().into_iter().skip(1) {
                assert!(2 * n <= x);
            }
        }
    }

    #[test]
    fn a_is_closed_under_divisors() {
        use rand::{Rng, SeedableRng};
        let s = Sieve::new(100_000).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let x = rng.gen_range(2..=100_000u64);
            let n = rng.gen_range(1..=x / 2);
            if !in_a(&s, n, x).unwrap() {
                continue;
            }
            let divs = s.divisors(n).unwrap();
            let d = divs[rng.gen_range(0..divs.len())];
            assert!(in_a(&s, d, x).unwrap(), "{d} | {n} ∈ A({x})");
        }
    }

    #[test]
    fn decomposition_examples() {
        let s = sieve();
        let mut d = decompose_a_xy(&s, 100, 100).unwrap();
        d.sort_unstable();
        assert_eq!(d, enumerate_a(&s, 100).unwrap());
        assert_eq!(decompose_a_xy(&s, 100, 1).unwrap(), vec![1]);
    }
}
