//! Floating-point companions of the set machinery: harmonic sums over `B(x)`,
//! the auxiliary function `η(s, t)` and the weighted-sum margin checker.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::Sieve;
use crate::sets::enumerate_b;

/// Neumaier (improved Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// `Σ_{b ∈ B(x)} 1/b`.
pub fn harmonic_sum_b(sieve: &Sieve, x: u64) -> Result<f64> {
    if x < 2 {
        return Err(Error::Domain(format!("harmonic sum needs x >= 2, got {x}")));
    }
    Ok(enumerate_b(sieve, x)?
        .into_iter()
        .map(|b| 1.0 / b as f64)
        .collect::<CompensatedSum>()
        .value())
}

/// `Σ_{b ∈ B(x), b > x/t} 1/b` for `2 <= t <= x`.
pub fn tail_sum_b(sieve: &Sieve, x: u64, t: f64) -> Result<f64> {
    if x < 2 || !(2.0..=x as f64).contains(&t) {
        return Err(Error::Domain(format!("tail sum needs x >= 2 and 2 <= t <= x, got x = {x}, t = {t}")));
    }
    Ok(enumerate_b(sieve, x)?
        .into_iter()
        .filter(|&b| b as f64 * t > x as f64)
        .map(|b| 1.0 / b as f64)
        .collect::<CompensatedSum>()
        .value())
}

/// `η(s, t) = s - 1 - log s / (1 - log s / log 9t)` on `t >= 1`, `0 < s <= t`.
pub fn eta(s: f64, t: f64) -> Result<f64> {
    if !(t >= 1.0 && s > 0.0 && s <= t && t.is_finite()) {
        return Err(Error::Domain(format!("eta needs t >= 1 and 0 < s <= t, got s = {s}, t = {t}")));
    }
    let l = (9.0 * t).ln();
    let ls = s.ln();
    Ok(s - 1.0 - ls / (1.0 - ls / l))
}

/// A family of non-negative integer weights `m(b)` indexed by `B(x)`.
///
/// Only listed `b` carry weight; omitted elements have `m(b) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightFamily {
    pub x: u64,
    pub y: u64,
    /// `(b, m(b))` with strictly increasing `b`.
    pub weights: Vec<(u64, u64)>,
}

/// `B(x)` with constant-time membership, for validating many families.
#[derive(Debug, Clone)]
pub struct BSet {
    x: u64,
    members: Vec<u64>,
    mask: Vec<bool>,
}

impl BSet {
    pub fn new(sieve: &Sieve, x: u64) -> Result<Self> {
        let members = enumerate_b(sieve, x)?;
        let mut mask = vec![false; x as usize + 1];
        for &b in &members {
            mask[b as usize] = true;
        }
        Ok(BSet { x, members, mask })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn contains(&self, n: u64) -> bool {
        n <= self.x && self.mask[n as usize]
    }
}

impl WeightFamily {
    /// Checks the weight bounds `0 <= m(b) <= x/b`, `Σ m(b) <= y` and `x >= 2y >= 2`.
    pub fn validate_in(&self, bset: &BSet) -> Result<()> {
        if bset.x() != self.x {
            return Err(Error::Precondition("B(x) computed for another x".into()));
        }
        if self.y == 0 || self.x < 2 * self.y {
            return Err(Error::Precondition(format!("need x >= 2y >= 2, got x = {}, y = {}", self.x, self.y)));
        }
        let mut total = 0u64;
        let mut prev = 0u64;
        for &(b, m) in &self.weights {
            if b <= prev {
                return Err(Error::Precondition("weights must be listed by increasing b".into()));
            }
            prev = b;
            if !bset.contains(b) {
                return Err(Error::Precondition(format!("{b} is not in B({})", self.x)));
            }
            if (b as u128) * (m as u128) > self.x as u128 {
                return Err(Error::Precondition(format!("m({b}) = {m} exceeds x/b")));
            }
            total = total.saturating_add(m);
        }
        if total > self.y {
            return Err(Error::Precondition(format!("Σ m(b) = {total} exceeds y = {}", self.y)));
        }
        Ok(())
    }

    pub fn validate(&self, sieve: &Sieve) -> Result<()> {
        self.validate_in(&BSet::new(sieve, self.x)?)
    }

    pub fn total(&self) -> u64 {
        self.weights.iter().map(|&(_, m)| m).sum()
    }
}

/// Right-hand side `1/log(9x/y) - 1/(5 log x)`.
pub fn lemma211_rhs(x: u64, y: u64) -> f64 {
    let (x, y) = (x as f64, y as f64);
    1.0 / (9.0 * x / y).ln() - 1.0 / (5.0 * x.ln())
}

/// Left-hand side `Σ_{m(b) >= 1} 1/(b log(9x/(b m(b))))`; zero weights are skipped.
pub fn lemma211_lhs(w: &WeightFamily) -> f64 {
    let x = w.x as f64;
    w.weights
        .iter()
        .filter(|&&(_, m)| m >= 1)
        .map(|&(b, m)| {
            let bm = b as f64 * m as f64;
            1.0 / (b as f64 * (9.0 * x / bm).ln())
        })
        .collect::<CompensatedSum>()
        .value()
}

fn margin_unchecked(w: &WeightFamily) -> f64 {
    lemma211_rhs(w.x, w.y) - lemma211_lhs(w)
}

/// `RHS - LHS` of the weighted-sum inequality for a validated family.
pub fn lemma211_margin(sieve: &Sieve, w: &WeightFamily) -> Result<f64> {
    w.validate(sieve)?;
    Ok(margin_unchecked(w))
}

/// How a random family was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `y'` units dropped on uniformly random elements of `B(x)`.
    Uniform,
    /// `m(b) = 1` on random elements above `√(xy)`.
    LargeSingles,
    /// Randomized rounding of `λ y / b`, the real-valued extremal profile.
    Balanced,
    /// Saturate `m(b) = floor(x/b)` on consecutive small `b` until the budget runs out.
    SmallFill,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::Uniform,
        FamilyKind::LargeSingles,
        FamilyKind::Balanced,
        FamilyKind::SmallFill,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Uniform => "uniform",
            FamilyKind::LargeSingles => "large_singles",
            FamilyKind::Balanced => "balanced",
            FamilyKind::SmallFill => "small_fill",
        }
    }
}

/// Draws one weight family of the given kind. Always satisfies the weight bounds.
pub fn random_family(bset: &BSet, y: u64, kind: FamilyKind, rng: &mut impl Rng) -> WeightFamily {
    let x = bset.x();
    let bs = bset.members();
    let mut m = vec![0u64; bs.len()];
    if !bs.is_empty() {
        match kind {
            FamilyKind::Uniform => {
                let units = rng.gen_range(1..=y);
                for _ in 0..units {
                    let i = rng.gen_range(0..bs.len());
                    if (m[i] + 1) * bs[i] <= x {
                        m[i] += 1;
                    }
                }
            }
            FamilyKind::LargeSingles => {
                let cut = ((x as f64) * (y as f64)).sqrt();
                let start = bs.partition_point(|&b| (b as f64) <= cut);
                let pool = bs.len() - start;
                if pool > 0 {
                    let k = rng.gen_range(1..=pool.min(y as usize));
                    for i in rand::seq::index::sample(rng, pool, k) {
                        m[start + i] = 1;
                    }
                }
            }
            FamilyKind::Balanced => {
                let lambda: f64 = rng.gen_range(0.5..=1.0);
                let mut total = 0u64;
                for (i, &b) in bs.iter().enumerate() {
                    let target = lambda * y as f64 / b as f64 + rng.gen::<f64>();
                    m[i] = (target.floor() as u64).min(x / b);
                    total += m[i];
                }
                let mut order: Vec<usize> = (0..bs.len()).collect();
                order.shuffle(rng);
                let mut k = 0;
                while total > y {
                    let i = order[k % order.len()];
                    if m[i] > 0 {
                        m[i] -= 1;
                        total -= 1;
                    }
                    k += 1;
                }
            }
            FamilyKind::SmallFill => {
                let mut budget = y;
                let mut i = rng.gen_range(0..bs.len().min(64).max(1));
                while budget > 0 && i < bs.len() {
                    let take = (x / bs[i]).min(budget);
                    m[i] = take;
                    budget -= take;
                    i += 1;
                }
            }
        }
    }
    WeightFamily {
        x,
        y,
        weights: bs.iter().copied().zip(m).filter(|&(_, w)| w > 0).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma211Row {
    pub x: u64,
    pub y: u64,
    pub ratio: u64,
    pub families: usize,
    pub well_formed: usize,
    pub rhs: f64,
    pub min_margin: f64,
    pub argmin_kind: FamilyKind,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma211Report {
    pub rows: Vec<Lemma211Row>,
    /// Smallest tested `x/y` whose minimum margin is positive.
    pub smallest_positive_ratio: Option<u64>,
}

/// Random search for small margins at each ratio `x/y`.
pub fn lemma211_search(sieve: &Sieve, x: u64, ratios: &[u64], families: usize, seed: u64) -> Result<Lemma211Report> {
    let bset = BSet::new(sieve, x)?;
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        if ratio < 2 || x / ratio == 0 {
            return Err(Error::Precondition(format!("ratio {ratio} is not usable at x = {x}")));
        }
        let y = x / ratio;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (x.rotate_left(17)) ^ ratio);
        let mut min_margin = f64::INFINITY;
        let mut argmin_kind = FamilyKind::Uniform;
        let mut well_formed = 0;
        for i in 0..families {
            let kind = FamilyKind::ALL[i % FamilyKind::ALL.len()];
            let w = random_family(&bset, y, kind, &mut rng);
            if w.validate_in(&bset).is_ok() {
                well_formed += 1;
            }
            let margin = margin_unchecked(&w);
            if margin < min_margin {
                min_margin = margin;
                argmin_kind = kind;
            }
        }
        rows.push(Lemma211Row {
            x,
            y,
            ratio,
            families,
            well_formed,
            rhs: lemma211_rhs(x, y),
            min_margin,
            argmin_kind,
            positive: min_margin > 0.0,
        });
    }
    let smallest_positive_ratio = rows.iter().filter(|r| r.positive).map(|r| r.ratio).min();
    Ok(Lemma211Report {
        rows,
        smallest_positive_ratio,
    })
}
