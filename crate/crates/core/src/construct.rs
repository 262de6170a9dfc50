//! Constructive lower bounds: geometric chains `2m - 4m - ... - 2^z m`, a long
//! divisor chain inside `A(x)`, and the recursive packing of disjoint chains
//! of common length `z`.
//!
//! The packing follows the recursion
//! `R(x, z) >= sum_{b in B(x)} R(x/b, z) + (windows of a chain in A(x))`:
//! multiples of distinct elements of `B(x)` never meet below `x`, and no
//! multiple of an element of `B(x)` lies in `A(x)`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::chain::{write_chains, Chain, PackingSummary, Relation};
use crate::error::{Error, Result};
use crate::number::Sieve;
use crate::oracle::{brute_big_f, brute_big_g, brute_f, brute_r, brute_t, OracleLimits};
use crate::sets::{enumerate_a, enumerate_b};

/// Disjoint divisor chains of common length `z`, all elements `<= x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPacking {
    pub x: u64,
    pub z: usize,
    pub chains: Vec<Chain>,
    pub covered: u64,
}

impl ChainPacking {
    pub fn empty(x: u64, z: usize) -> Self {
        ChainPacking {
            x,
            z,
            chains: vec![],
            covered: 0,
        }
    }

    fn from_chains(x: u64, z: usize, chains: Vec<Chain>) -> Self {
        let covered = (chains.len() * z) as u64;
        ChainPacking { x, z, chains, covered }
    }

    pub fn summary(&self) -> PackingSummary {
        PackingSummary {
            x: self.x,
            z: self.z,
            chains: self.chains.len(),
            covered: self.covered,
        }
    }

    /// Chain file with the packing trailer.
    pub fn to_text(&self) -> String {
        let mut s = write_chains(Relation::Divisor, &self.chains);
        s.push_str(&self.summary().to_string());
        s.push('\n');
        s
    }

    /// Validity, exact length, range, global disjointness and the covered count.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let mut seen = HashSet::new();
        for (i, c) in self.chains.iter().enumerate() {
            if c.relation() != Relation::Divisor {
                return Err(format!("chain {i} is not a divisor chain"));
            }
            c.validate().map_err(|e| format!("chain {i}: {e}"))?;
            if c.len() != self.z {
                return Err(format!("chain {i} has length {} instead of {}", c.len(), self.z));
            }
            for &e in c.elements() {
                if e > self.x {
                    return Err(format!("chain {i} holds {e} > x = {}", self.x));
                }
                if !seen.insert(e) {
                    return Err(format!("{e} is covered twice"));
                }
            }
        }
        if seen.len() as u64 != self.covered {
            return Err(format!("covered = {} but the union has {} elements", self.covered, seen.len()));
        }
        Ok(())
    }
}

/// Chains `2m - 4m - ... - 2^z m` for odd `m <= x / 2^z`.
pub fn geometric_chains(x: u64, z: usize) -> ChainPacking {
    let top = match u32::try_from(z).ok().and_then(|z| 1u64.checked_shl(z)) {
        Some(t) if z >= 1 && t <= x && z < 64 => t,
        _ => return ChainPacking::empty(x, z),
    };
    let chains = (1..=x / top)
        .step_by(2)
        .map(|m| Chain::divisor((1..=z as u32).map(|k| m << k).collect()))
        .collect();
    ChainPacking::from_chains(x, z, chains)
}

/// Leftmost disjoint windows of length `z`; the remainder is dropped.
pub fn extract_subchains(c: &Chain, z: usize) -> Vec<Chain> {
    if z == 0 {
        return vec![];
    }
    c.elements()
        .chunks_exact(z)
        .map(|w| Chain::new(w.to_vec(), c.relation()))
        .collect()
}

fn divides_either(a: u64, b: u64) -> bool {
    a % b == 0 || b % a == 0
}

/// Concatenates consecutive segments whenever some orientation of the pair
/// meets at a divisible junction; otherwise starts a new segment.
fn join_segments(segments: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut it = segments.into_iter();
    let Some(mut cur) = it.next() else { return out };
    for mut next in it {
        let (cf, cl) = (cur[0], *cur.last().unwrap());
        let (nf, nl) = (next[0], *next.last().unwrap());
        if divides_either(cl, nf) {
        } else if divides_either(cl, nl) {
            next.reverse();
        } else if divides_either(cf, nf) {
            cur.reverse();
        } else if divides_either(cf, nl) {
            cur.reverse();
            next.reverse();
        } else {
            out.push(std::mem::replace(&mut cur, next));
            continue;
        }
        cur.extend(next);
    }
    out.push(cur);
    out
}

/// Path cover of `{m : S(m) <= x, P(m) <= y}` following
/// `{1} ⊔ ⊔_{p <= min(y, √x)} p·A(x/p, p)`, blocks by descending `p`.
fn segments(sieve: &Sieve, x: u64, y: u64) -> Vec<Vec<u64>> {
    let mut primes = Vec::new();
    let mut p = 2u64;
    while p <= y && p * p <= x {
        if sieve.is_prime(p) {
            primes.push(p);
        }
        p += 1;
    }
    let mut level = vec![vec![1u64]];
    for &p in primes.iter().rev() {
        for seg in segments(sieve, x / p, p) {
            level.push(seg.into_iter().map(|m| m * p).collect());
        }
    }
    join_segments(level)
}

/// Divisibility graph on a vertex subset of `[1, top]`, in compressed rows.
struct DivisorGraph {
    index: Vec<u32>,
    vertices: Vec<u64>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl DivisorGraph {
    fn new(vertices: Vec<u64>, top: u64) -> Self {
        let mut index = vec![u32::MAX; top as usize + 1];
        for (i, &v) in vertices.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let mut deg = vec![0usize; vertices.len()];
        for (i, &a) in vertices.iter().enumerate() {
            let mut m = 2 * a;
            while m <= top {
                let j = index[m as usize];
                if j != u32::MAX {
                    deg[i] += 1;
                    deg[j as usize] += 1;
                }
                m += a;
            }
        }
        let mut offsets = Vec::with_capacity(vertices.len() + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; *offsets.last().unwrap()];
        // rows come out sorted: divisors ascending, then multiples ascending
        for (i, &a) in vertices.iter().enumerate() {
            let mut m = 2 * a;
            while m <= top {
                let j = index[m as usize];
                if j != u32::MAX {
                    targets[fill[j as usize]] = i as u32;
                    fill[j as usize] += 1;
                }
                m += a;
            }
        }
        for (i, &a) in vertices.iter().enumerate() {
            let mut m = 2 * a;
            while m <= top {
                let j = index[m as usize];
                if j != u32::MAX {
                    targets[fill[i]] = j;
                    fill[i] += 1;
                }
                m += a;
            }
        }
        DivisorGraph {
            index,
            vertices,
            offsets,
            targets,
        }
    }

    fn neighbours(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Extends both ends of `chain`, always moving to the unused neighbour
    /// with the fewest unused neighbours (smallest integer on ties).
    fn extend(&self, chain: &mut Vec<u64>) {
        let n = self.vertices.len();
        let mut used = vec![false; n];
        let mut free: Vec<u32> = (0..n).map(|i| self.neighbours(i).len() as u32).collect();
        let take = |i: usize, used: &mut Vec<bool>, free: &mut Vec<u32>| {
            used[i] = true;
            for &j in self.neighbours(i) {
                free[j as usize] -= 1;
            }
        };
        for &v in chain.iter() {
            take(self.index[v as usize] as usize, &mut used, &mut free);
        }
        for _ in 0..2 {
            while let Some(&tail) = chain.last() {
                let t = self.index[tail as usize] as usize;
                let next = self
                    .neighbours(t)
                    .iter()
                    .map(|&j| j as usize)
                    .filter(|&j| !used[j])
                    .min_by_key(|&j| (free[j], self.vertices[j]));
                match next {
                    Some(j) => {
                        take(j, &mut used, &mut free);
                        chain.push(self.vertices[j]);
                    }
                    None => break,
                }
            }
            chain.reverse();
        }
    }
}

/// A long divisor chain made of elements of `A(x)`. Deterministic, best effort.
pub fn chain_in_a(sieve: &Sieve, x: u64) -> Result<Chain> {
    if x == 0 {
        return Err(Error::OutOfRange {
            value: 0,
            reason: "x must be positive",
        });
    }
    let members = enumerate_a(sieve, x)?;
    let top = *members.last().unwrap();
    let segs = segments(sieve, x, x);
    let mut best = segs.into_iter().fold(Vec::new(), |b, s| if s.len() > b.len() { s } else { b });
    DivisorGraph::new(members, top).extend(&mut best);
    let chain = Chain::divisor(best);
    chain
        .validate()
        .map_err(|e| Error::Precondition(format!("chain in A({x}) failed validation: {e}")))?;
    Ok(chain)
}

/// The longer of `chain_in_a(x)` extended over `[1, x]` and a greedy walk from `x`.
pub fn long_chain(sieve: &Sieve, x: u64) -> Result<Chain> {
    let g = DivisorGraph::new((1..=x).collect(), x);
    let mut best = chain_in_a(sieve, x)?.into_elements();
    g.extend(&mut best);
    let mut from_top = vec![x];
    g.extend(&mut from_top);
    if from_top.len() > best.len() {
        best = from_top;
    }
    Ok(Chain::divisor(best))
}

struct Packer<'s> {
    sieve: &'s Sieve,
    z: usize,
    memo: HashMap<u64, Vec<Vec<u64>>>,
}

impl Packer<'_> {
    fn pack(&mut self, x: u64) -> Result<Vec<Vec<u64>>> {
        if let Some(hit) = self.memo.get(&x) {
            return Ok(hit.clone());
        }
        let mut rec: Vec<Vec<u64>> = Vec::new();
        for b in enumerate_b(self.sieve, x)? {
            for c in self.pack(x / b)? {
                rec.push(c.into_iter().map(|e| e * b).collect());
            }
        }
        let in_a = chain_in_a(self.sieve, x)?;
        rec.extend(extract_subchains(&in_a, self.z).into_iter().map(Chain::into_elements));
        let geo = geometric_chains(x, self.z);
        let out = if geo.chains.len() > rec.len() {
            geo.chains.into_iter().map(Chain::into_elements).collect()
        } else {
            rec
        };
        self.memo.insert(x, out.clone());
        Ok(out)
    }
}

/// Recursive packing of disjoint divisor chains of length `z` in `[1, x]`.
///
/// Each level keeps the larger of the recursive packing and the geometric one
/// (ties keep the recursive packing), so the result never covers less than
/// `geometric_chains(x, z)`.
pub fn pack_chains(sieve: &Sieve, x: u64, z: usize) -> Result<ChainPacking> {
    if x == 0 || z == 0 {
        return Err(Error::Precondition("x and z must be positive".into()));
    }
    sieve.require(x)?;
    let mut p = Packer {
        sieve,
        z,
        memo: HashMap::new(),
    };
    let chains = p.pack(x)?.into_iter().map(Chain::divisor).collect();
    Ok(ChainPacking::from_chains(x, z, chains))
}

/// One reduction between the chain quantities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionEntry {
    /// `F>=f`, `F>=R` or `T<=G`.
    pub reduction: String,
    pub x: u64,
    pub y: Option<u64>,
    pub z: Option<usize>,
    /// Constructive bound: a lower bound for `F(x, y)`, or for `T(x, z)` on the last row.
    pub constructive: u64,
    pub oracle_lhs: Option<u64>,
    pub oracle_rhs: Option<u64>,
    /// Whether the oracle values satisfy the reduction, when computed.
    pub holds: Option<bool>,
}

/// `F(x, y) >= f(x)`, `F(x, y) >= R(x, ⌈x/y⌉)` and `T(x, z) <= G(x, ⌊x/z⌋)`,
/// each with a constructive bound and, for `x` within the oracle limits, exact values.
pub fn lift_reductions(sieve: &Sieve, x: u64, y: u64, z: usize, limits: &OracleLimits) -> Result<Vec<ReductionEntry>> {
    if y == 0 || y > x || z == 0 {
        return Err(Error::Precondition(format!("need x >= y >= 1 and z >= 1, got x={x} y={y} z={z}")));
    }
    let exact = x <= limits.max_pack && x <= crate::oracle::MAX_COVER_VERTICES;
    let mut rows = Vec::with_capacity(3);

    let chain = long_chain(sieve, x)?;
    let (lhs, rhs) = if exact {
        (Some(brute_big_f(x, y, limits)?.value), Some(brute_f(x, limits)?.value))
    } else {
        (None, None)
    };
    rows.push(ReductionEntry {
        reduction: "F>=f".into(),
        x,
        y: Some(y),
        z: None,
        constructive: chain.len() as u64,
        oracle_lhs: lhs,
        oracle_rhs: rhs,
        holds: lhs.zip(rhs).map(|(l, r)| l >= r),
    });

    let len = x.div_ceil(y) as usize;
    let packing = pack_chains(sieve, x, len)?;
    let rhs = if exact { Some(brute_r(x, len, limits)?.value) } else { None };
    rows.push(ReductionEntry {
        reduction: "F>=R".into(),
        x,
        y: Some(y),
        z: Some(len),
        constructive: packing.covered,
        oracle_lhs: lhs,
        oracle_rhs: rhs,
        holds: lhs.zip(rhs).map(|(l, r)| l >= r),
    });

    let width = x / z as u64;
    let packing = pack_chains(sieve, x, z)?;
    let (lhs, rhs) = if exact && width >= 1 {
        (Some(brute_t(x, z, limits)?.value), Some(brute_big_g(x, width, limits)?.value))
    } else if exact {
        (Some(brute_t(x, z, limits)?.value), Some(0))
    } else {
        (None, None)
    };
    rows.push(ReductionEntry {
        reduction: "T<=G".into(),
        x,
        y: (width >= 1).then_some(width),
        z: Some(z),
        constructive: packing.covered,
        oracle_lhs: lhs,
        oracle_rhs: rhs,
        holds: lhs.zip(rhs).map(|(l, r)| l <= r),
    });
    Ok(rows)
}
