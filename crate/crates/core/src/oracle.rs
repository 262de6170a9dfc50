//! Exact values of the chain quantities at tiny scale, by exhaustive search.
//!
//! * `f`, `g`, `f_a`: longest chain for the divisor relation on `[1, x]`, for
//!   the bounded-lcm relation, and for the divisor relation inside `A(x)`.
//! * `R`, `T`: most integers covered by pairwise disjoint chains of common
//!   length `z`.
//! * `F`, `G`: most integers covered by at most `y` pairwise disjoint chains.
//!
//! Chains of length 1 are legal. Candidates are explored in ascending numeric
//! order, so the first optimal witness is reproducible.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, Relation};
use crate::error::{Error, Result};
use crate::number::Sieve;
use crate::sets::enumerate_a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "f")]
    LongestF,
    #[serde(rename = "g")]
    LongestG,
    #[serde(rename = "f_a")]
    LongestFA,
    #[serde(rename = "R")]
    EqualR,
    #[serde(rename = "T")]
    EqualT,
    #[serde(rename = "F")]
    DisjointF,
    #[serde(rename = "G")]
    DisjointG,
}

impl Quantity {
    pub fn symbol(self) -> &'static str {
        match self {
            Quantity::LongestF => "f",
            Quantity::LongestG => "g",
            Quantity::LongestFA => "f_a",
            Quantity::EqualR => "R",
            Quantity::EqualT => "T",
            Quantity::DisjointF => "F",
            Quantity::DisjointG => "G",
        }
    }

    pub fn parse(s: &str) -> Option<Quantity> {
        Some(match s {
            "f" => Quantity::LongestF,
            "g" => Quantity::LongestG,
            "f_a" | "fa" => Quantity::LongestFA,
            "R" => Quantity::EqualR,
            "T" => Quantity::EqualT,
            "F" => Quantity::DisjointF,
            "G" => Quantity::DisjointG,
            _ => return None,
        })
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Size limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    /// Largest `x` for the longest-chain searches.
    pub max_path: u64,
    /// Largest `x` for the packing searches.
    pub max_pack: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_path: 30,
            max_pack: 14,
        }
    }
}

/// Hard ceiling of the subset tables behind `F` and `G`.
pub const MAX_COVER_VERTICES: u64 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub quantity: Quantity,
    pub x: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<usize>,
    pub value: u64,
    pub witness: Vec<Chain>,
}

impl OracleResult {
    /// Every witness chain is valid, the chains are disjoint, and they cover `value` integers.
    pub fn check_witness(&self) -> std::result::Result<(), String> {
        let mut seen = HashSet::new();
        let mut covered = 0u64;
        for c in &self.witness {
            c.validate().map_err(|e| e.to_string())?;
            if let Some(&bad) = c.elements().iter().find(|&&e| e > self.x) {
                return Err(format!("{bad} exceeds x = {}", self.x));
            }
            if let Some(z) = self.z {
                if c.len() != z {
                    return Err(format!("chain of length {} where z = {z}", c.len()));
                }
            }
            for &e in c.elements() {
                if !seen.insert(e) {
                    return Err(format!("{e} appears twice"));
                }
            }
            covered += c.len() as u64;
        }
        if let Some(y) = self.y {
            if self.witness.len() as u64 > y {
                return Err(format!("{} chains where y = {y}", self.witness.len()));
            }
        }
        match self.quantity {
            Quantity::LongestF | Quantity::LongestG | Quantity::LongestFA if self.witness.len() > 1 => {
                Err("a longest-chain witness is a single chain".into())
            }
            _ if covered != self.value => Err(format!("witness covers {covered}, value is {}", self.value)),
            _ => Ok(()),
        }
    }
}

/// Relation graph on a small vertex set, adjacency as bitmasks.
#[derive(Debug, Clone)]
pub struct SmallGraph {
    vertices: Vec<u64>,
    adj: Vec<u64>,
    relation: Relation,
    /// Vertices known to be pairwise non-adjacent (the integers above `max/2`).
    independent: u64,
}

impl SmallGraph {
    pub fn new(vertices: Vec<u64>, relation: Relation) -> Result<Self> {
        if vertices.len() > 64 {
            return Err(Error::Precondition(format!("{} vertices exceed the 64-bit search", vertices.len())));
        }
        let n = vertices.len();
        let mut adj = vec![0u64; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if relation.related(vertices[i], vertices[j])? {
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
            }
        }
        let top = vertices.iter().copied().max().unwrap_or(0);
        let mut independent = 0u64;
        for (i, &v) in vertices.iter().enumerate() {
            if 2 * v > top {
                independent |= 1 << i;
            }
        }
        if (0..n).any(|i| independent >> i & 1 == 1 && adj[i] & independent != 0) {
            independent = 0;
        }
        Ok(SmallGraph {
            vertices,
            adj,
            relation,
            independent,
        })
    }

    /// The relation graph on `[1, x]`.
    pub fn on_range(x: u64, relation: Relation) -> Result<Self> {
        SmallGraph::new((1..=x).collect(), relation)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn full(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    fn chain_of(&self, idx: &[usize]) -> Chain {
        Chain::new(idx.iter().map(|&i| self.vertices[i]).collect(), self.relation)
    }

    /// Vertices reachable from `v` through `allowed`.
    fn reach(&self, v: usize, allowed: u64) -> u64 {
        let mut seen = self.adj[v] & allowed;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let u = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.adj[u];
            }
            next &= allowed & !seen;
            seen |= next;
            frontier = next;
        }
        seen
    }
}

struct PathSearch<'g> {
    g: &'g SmallGraph,
    path: Vec<usize>,
    best: Vec<usize>,
    seen: HashSet<(u64, u8)>,
}

impl PathSearch<'_> {
    fn dfs(&mut self, v: usize, mask: u64) {
        if self.path.len() > self.best.len() {
            self.best = self.path.clone();
        }
        if self.best.len() == self.g.len() {
            return;
        }
        // same endpoint and visited set: the continuation is identical
        if !self.seen.insert((mask, v as u8)) {
            return;
        }
        let reach = self.g.reach(v, !mask & self.g.full());
        if self.path.len() + reach.count_ones() as usize <= self.best.len() {
            return;
        }
        let mut cand = self.g.adj[v] & !mask;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            self.path.push(w);
            self.dfs(w, mask | 1 << w);
            self.path.pop();
        }
    }
}

/// Longest simple path in `g`, as vertex values.
pub fn longest_path(g: &SmallGraph) -> Chain {
    if g.is_empty() {
        return Chain::new(vec![], g.relation);
    }
    let mut s = PathSearch {
        g,
        path: Vec::new(),
        best: Vec::new(),
        seen: HashSet::new(),
    };
    for start in 0..g.len() {
        s.path.clear();
        s.path.push(start);
        s.dfs(start, 1 << start);
        if s.best.len() == g.len() {
            break;
        }
    }
    g.chain_of(&s.best)
}

fn check_path_limit(x: u64, limits: &OracleLimits) -> Result<()> {
    if x == 0 || x > limits.max_path {
        return Err(Error::OutOfRange {
            value: x,
            reason: "x outside the longest-chain oracle range",
        });
    }
    Ok(())
}

fn check_pack_limit(x: u64, limits: &OracleLimits) -> Result<()> {
    if x == 0 || x > limits.max_pack {
        return Err(Error::OutOfRange {
            value: x,
            reason: "x outside the packing oracle range",
        });
    }
    Ok(())
}

fn single(quantity: Quantity, x: u64, chain: Chain) -> OracleResult {
    OracleResult {
        quantity,
        x,
        y: None,
        z: None,
        value: chain.len() as u64,
        witness: vec![chain],
    }
}

/// `f(x)`.
pub fn brute_f(x: u64, limits: &OracleLimits) -> Result<OracleResult> {
    check_path_limit(x, limits)?;
    let g = SmallGraph::on_range(x, Relation::Divisor)?;
    Ok(single(Quantity::LongestF, x, longest_path(&g)))
}

/// `g(x)`.
pub fn brute_g(x: u64, limits: &OracleLimits) -> Result<OracleResult> {
    check_path_limit(x, limits)?;
    let g = SmallGraph::on_range(x, Relation::LcmBounded { bound: x })?;
    Ok(single(Quantity::LongestG, x, longest_path(&g)))
}

/// `f_a(x)`: longest divisor chain made of elements of `A(x)`.
pub fn brute_f_a(sieve: &Sieve, x: u64, limits: &OracleLimits) -> Result<OracleResult> {
    check_path_limit(x, limits)?;
    let g = SmallGraph::new(enumerate_a(sieve, x)?, Relation::Divisor)?;
    Ok(single(Quantity::LongestFA, x, longest_path(&g)))
}

struct PackSearch<'g> {
    g: &'g SmallGraph,
    z: usize,
    chosen: Vec<Vec<usize>>,
    best: Vec<Vec<usize>>,
    reached: HashMap<u64, usize>,
}

impl PackSearch<'_> {
    fn upper_bound(&self, rem: u64) -> usize {
        let z = self.z;
        if z == 1 {
            return rem.count_ones() as usize;
        }
        let mut usable = 0u64;
        let mut r = rem;
        while r != 0 {
            let v = r.trailing_zeros() as usize;
            r &= r - 1;
            if self.g.adj[v] & rem != 0 {
                usable |= 1 << v;
            }
        }
        let by_size = usable.count_ones() as usize / z;
        // consecutive path vertices are never both independent
        let low = (usable & !self.g.independent).count_ones() as usize;
        by_size.min(low / (z / 2))
    }

    /// All `z`-vertex paths inside `rem` through `v`, one per vertex set.
    ///
    /// A path is `reverse(left) v right`; each undirected path is produced once
    /// by requiring `left` shorter than `right`, or as long with a smaller first vertex.
    fn paths_through(&self, v: usize, rem: u64) -> Vec<(u64, Vec<usize>)> {
        let mut arms = Arms {
            g: self.g,
            z: self.z,
            rem,
            v,
            right: Vec::new(),
            left: Vec::new(),
            sets: HashSet::new(),
            out: Vec::new(),
        };
        arms.grow_right(v, 1 << v);
        arms.out
    }

    fn search(&mut self, rem: u64) {
        let count = self.chosen.len();
        if count > self.best.len() {
            self.best = self.chosen.clone();
        }
        if rem == 0 || count + self.upper_bound(rem) <= self.best.len() {
            return;
        }
        match self.reached.get(&rem) {
            Some(&c) if c >= count => return,
            _ => {
                self.reached.insert(rem, count);
            }
        }
        // the largest remaining integer has the fewest neighbours
        let v = 63 - rem.leading_zeros() as usize;
        for (set, order) in self.paths_through(v, rem) {
            self.chosen.push(order);
            self.search(rem & !set);
            self.chosen.pop();
        }
        self.search(rem & !(1 << v));
    }
}

struct Arms<'g> {
    g: &'g SmallGraph,
    z: usize,
    rem: u64,
    v: usize,
    right: Vec<usize>,
    left: Vec<usize>,
    sets: HashSet<u64>,
    out: Vec<(u64, Vec<usize>)>,
}

impl Arms<'_> {
    fn grow_right(&mut self, tip: usize, mask: u64) {
        let j = self.right.len();
        let k = self.z - 1 - j;
        if k <= j {
            self.grow_left(self.v, mask, k);
        }
        if j + 1 == self.z {
            return;
        }
        let mut cand = self.g.adj[tip] & self.rem & !mask;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            self.right.push(w);
            self.grow_right(w, mask | 1 << w);
            self.right.pop();
        }
    }

    fn grow_left(&mut self, tip: usize, mask: u64, k: usize) {
        if self.left.len() == k {
            if self.sets.insert(mask) {
                let mut order: Vec<usize> = self.left.iter().rev().copied().collect();
                order.push(self.v);
                order.extend_from_slice(&self.right);
                self.out.push((mask, order));
            }
            return;
        }
        let mut cand = self.g.adj[tip] & self.rem & !mask;
        if self.left.is_empty() && k == self.right.len() {
            // equal arms: the left one starts below the right one
            cand &= (1u64 << self.right[0]) - 1;
        }
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            self.left.push(w);
            self.grow_left(w, mask | 1 << w, k);
            self.left.pop();
        }
    }
}

/// Largest number of pairwise disjoint `z`-vertex paths in `g`.
pub fn max_equal_packing(g: &SmallGraph, z: usize) -> Vec<Chain> {
    if z == 0 || g.is_empty() {
        return vec![];
    }
    let mut s = PackSearch {
        g,
        z,
        chosen: Vec::new(),
        best: Vec::new(),
        reached: HashMap::new(),
    };
    s.search(g.full());
    let mut chains: Vec<Chain> = s.best.iter().map(|p| g.chain_of(p)).collect();
    chains.sort_by_key(|c| c.elements().iter().copied().min());
    chains
}

fn equal(quantity: Quantity, x: u64, z: usize, relation: Relation, limits: &OracleLimits) -> Result<OracleResult> {
    check_pack_limit(x, limits)?;
    if z == 0 {
        return Err(Error::Precondition("z must be at least 1".into()));
    }
    let g = SmallGraph::on_range(x, relation)?;
    let witness = max_equal_packing(&g, z);
    Ok(OracleResult {
        quantity,
        x,
        y: None,
        z: Some(z),
        value: (witness.len() * z) as u64,
        witness,
    })
}

/// `R(x, z)`.
pub fn brute_r(x: u64, z: usize, limits: &OracleLimits) -> Result<OracleResult> {
    equal(Quantity::EqualR, x, z, Relation::Divisor, limits)
}

/// `T(x, z)`.
pub fn brute_t(x: u64, z: usize, limits: &OracleLimits) -> Result<OracleResult> {
    equal(Quantity::EqualT, x, z, Relation::LcmBounded { bound: x }, limits)
}

/// Minimum path covers of every vertex subset, for `F` and `G`.
pub struct CoverTable<'g> {
    g: &'g SmallGraph,
    /// `ends[mask]`: vertices at which a Hamiltonian path of `mask` can end.
    ends: Vec<u32>,
    /// `cover[mask]`: fewest disjoint paths partitioning `mask`.
    cover: Vec<u8>,
}

impl<'g> CoverTable<'g> {
    pub fn new(g: &'g SmallGraph) -> Result<Self> {
        let n = g.len();
        if n as u64 > MAX_COVER_VERTICES {
            return Err(Error::OutOfRange {
                value: n as u64,
                reason: "cover tables are limited to 20 vertices",
            });
        }
        let size = 1usize << n;
        let mut ends = vec![0u32; size];
        for i in 0..n {
            ends[1 << i] = 1 << i;
        }
        for mask in 1..size {
            let mut e = ends[mask];
            while e != 0 {
                let v = e.trailing_zeros() as usize;
                e &= e - 1;
                let mut ext = g.adj[v] as usize & !mask & (size - 1);
                while ext != 0 {
                    let w = ext.trailing_zeros() as usize;
                    ext &= ext - 1;
                    ends[mask | 1 << w] |= 1 << w;
                }
            }
        }
        let mut cover = vec![u8::MAX; size];
        cover[0] = 0;
        for mask in 1..size {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            // submasks of `rest`, each joined with the lowest vertex
            let mut sub = rest;
            loop {
                let part = sub | low;
                if ends[part] != 0 {
                    let c = cover[mask ^ part].saturating_add(1);
                    if c < cover[mask] {
                        cover[mask] = c;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        Ok(CoverTable { g, ends, cover })
    }

    /// Most vertices coverable by at most `y` disjoint paths.
    pub fn best_with(&self, y: u64) -> (u64, Vec<Chain>) {
        let mut best_mask = 0usize;
        for mask in 0..self.cover.len() {
            if (self.cover[mask] as u64) <= y && mask.count_ones() > best_mask.count_ones() {
                best_mask = mask;
            }
        }
        (best_mask.count_ones() as u64, self.partition(best_mask))
    }

    fn partition(&self, mut mask: usize) -> Vec<Chain> {
        let mut out = Vec::new();
        while mask != 0 {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut sub = rest;
            let part = loop {
                let part = sub | low;
                if self.ends[part] != 0 && self.cover[mask ^ part] as u16 + 1 == self.cover[mask] as u16 {
                    break part;
                }
                sub = (sub - 1) & rest;
            };
            out.push(self.path_of(part));
            mask ^= part;
        }
        out
    }

    fn path_of(&self, mut part: usize) -> Chain {
        let mut order = Vec::new();
        let mut end = self.ends[part].trailing_zeros() as usize;
        loop {
            order.push(end);
            let prev_mask = part & !(1 << end);
            if prev_mask == 0 {
                break;
            }
            let mut e = self.ends[prev_mask] & self.g.adj[end] as u32;
            debug_assert!(e != 0);
            let prev = e.trailing_zeros() as usize;
            e &= e - 1;
            let _ = e;
            part = prev_mask;
            end = prev;
        }
        order.reverse();
        self.g.chain_of(&order)
    }
}

fn disjoint(quantity: Quantity, x: u64, y: u64, relation: Relation, limits: &OracleLimits) -> Result<OracleResult> {
    check_pack_limit(x, limits)?;
    if y == 0 {
        return Err(Error::Precondition("y must be at least 1".into()));
    }
    let g = SmallGraph::on_range(x, relation)?;
    let (value, witness) = CoverTable::new(&g)?.best_with(y);
    Ok(OracleResult {
        quantity,
        x,
        y: Some(y),
        z: None,
        value,
        witness,
    })
}

/// `F(x, y)`.
pub fn brute_big_f(x: u64, y: u64, limits: &OracleLimits) -> Result<OracleResult> {
    disjoint(Quantity::DisjointF, x, y, Relation::Divisor, limits)
}

/// `G(x, y)`.
pub fn brute_big_g(x: u64, y: u64, limits: &OracleLimits) -> Result<OracleResult> {
    disjoint(Quantity::DisjointG, x, y, Relation::LcmBounded { bound: x }, limits)
}

/// All `F(x, y)` (or `G`) for `y = 1..=x` from one cover table.
pub fn disjoint_profile(x: u64, relation: Relation, limits: &OracleLimits) -> Result<Vec<u64>> {
    check_pack_limit(x, limits)?;
    let g = SmallGraph::on_range(x, relation)?;
    let table = CoverTable::new(&g)?;
    Ok((1..=x).map(|y| table.best_with(y).0).collect())
}

/// Dispatches on the quantity; `param` is `y` for `F`/`G` and `z` for `R`/`T`.
pub fn brute(sieve: &Sieve, quantity: Quantity, x: u64, param: Option<u64>, limits: &OracleLimits) -> Result<OracleResult> {
    let need = |name: &str| {
        param.ok_or_else(|| Error::Precondition(format!("quantity {quantity} needs {name}")))
    };
    match quantity {
        Quantity::LongestF => brute_f(x, limits),
        Quantity::LongestG => brute_g(x, limits),
        Quantity::LongestFA => brute_f_a(sieve, x, limits),
        Quantity::EqualR => brute_r(x, need("z")? as usize, limits),
        Quantity::EqualT => brute_t(x, need("z")? as usize, limits),
        Quantity::DisjointF => brute_big_f(x, need("y")?, limits),
        Quantity::DisjointG => brute_big_g(x, need("y")?, limits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> OracleLimits {
        OracleLimits::default()
    }

    #[test]
    fn longest_divisor_chain_small_values() {
        // f(3) = 3 (2-1-3); f(5) = 4 since 3 and 5 both hang off 1 only; f(6) = 6
        assert_eq!(brute_f(3, &limits()).unwrap().value, 3);
        assert_eq!(brute_f(5, &limits()).unwrap().value, 4);
        let six = brute_f(6, &limits()).unwrap();
        assert_eq!(six.value, 6);
        six.check_witness().unwrap();
        assert!(Chain::divisor(vec![4, 2, 6, 3, 1, 5]).validate().is_ok());
        assert_eq!(brute_f(1, &limits()).unwrap().value, 1);
        assert!(brute_f(31, &limits()).is_err());
        assert!(brute_f(0, &limits()).is_err());
    }

    // Exhaustive permutation search, independent of the DFS above.
    fn longest_by_permutations(vertices: &[u64], relation: Relation) -> usize {
        fn rec(vs: &[u64], rel: Relation, path: &mut Vec<u64>, used: &mut Vec<bool>, best: &mut usize) {
            *best = (*best).max(path.len());
            for i in 0..vs.len() {
                if used[i] {
                    continue;
                }
                if let Some(&last) = path.last() {
                    if !rel.related(last, vs[i]).unwrap() {
                        continue;
                    }
                }
                used[i] = true;
                path.push(vs[i]);
                rec(vs, rel, path, used, best);
                path.pop();
                used[i] = false;
            }
        }
        let mut best = 0;
        rec(vertices, relation, &mut vec![], &mut vec![false; vertices.len()], &mut best);
        best
    }

    #[test]
    fn longest_path_matches_plain_enumeration() {
        for x in 1..=10u64 {
            let vs: Vec<u64> = (1..=x).collect();
            assert_eq!(
                brute_f(x, &limits()).unwrap().value as usize,
                longest_by_permutations(&vs, Relation::Divisor),
                "f({x})"
            );
            assert_eq!(
                brute_g(x, &limits()).unwrap().value as usize,
                longest_by_permutations(&vs, Relation::LcmBounded { bound: x }),
                "g({x})"
            );
        }
    }

    #[test]
    fn f_a_small_values() {
        let s = Sieve::new(100).unwrap();
        let r = brute_f_a(&s, 10, &limits()).unwrap();
        assert_eq!(r.value, 4);
        r.check_witness().unwrap();
        assert_eq!(brute_f_a(&s, 1, &limits()).unwrap().value, 1);
    }

    #[test]
    fn packing_small_values() {
        for x in 1..=10 {
            assert_eq!(brute_r(x, 1, &limits()).unwrap().value, x);
        }
        // {2,4,8}, {3,6,12}... at x = 12, z = 3: 1-5-10, 2-4-8, 3-6-12, 7? no partner
        let r = brute_r(12, 3, &limits()).unwrap();
        r.check_witness().unwrap();
        assert_eq!(r.value % 3, 0);
        assert!(brute_r(15, 2, &limits()).is_err());
        assert!(brute_r(5, 0, &limits()).is_err());
    }

    // Brute force over all ordered chain families, independent of both searches.
    fn families_brute(x: u64, relation: Relation, max_chains: Option<u64>, len: Option<usize>) -> u64 {
        fn rec(
            x: u64,
            rel: Relation,
            used: &mut Vec<bool>,
            chains: u64,
            covered: u64,
            max_chains: Option<u64>,
            len: Option<usize>,
            best: &mut u64,
        ) {
            *best = (*best).max(covered);
            if max_chains.is_some_and(|m| chains >= m) {
                return;
            }
            // next chain starts at the smallest unused vertex allowed to start, any vertex
            let lowest = (1..=x).find(|&v| !used[v as usize]);
            let Some(first) = lowest else { return };
            // either `first` is never used, or some chain contains it
            used[first as usize] = true;
            rec(x, rel, used, chains, covered, max_chains, len, best);
            used[first as usize] = false;
            let mut path = vec![first];
            used[first as usize] = true;
            extend(x, rel, used, &mut path, chains, covered, max_chains, len, best);
            used[first as usize] = false;
        }
        #[allow(clippy::too_many_arguments)]
        fn extend(
            x: u64,
            rel: Relation,
            used: &mut Vec<bool>,
            path: &mut Vec<u64>,
            chains: u64,
            covered: u64,
            max_chains: Option<u64>,
            len: Option<usize>,
            best: &mut u64,
        ) {
            let ok_len = len.map_or(true, |l| path.len() == l);
            if ok_len {
                // mark chain vertices as "used by a chain" by leaving them marked
                rec(x, rel, used, chains + 1, covered + path.len() as u64, max_chains, len, best);
            }
            if len.is_some_and(|l| path.len() >= l) {
                return;
            }
            for end in [0usize, 1] {
                if end == 1 && path.len() == 1 {
                    continue;
                }
                let tip = if end == 0 { *path.last().unwrap() } else { path[0] };
                for w in 1..=x {
                    if used[w as usize] || !rel.related(tip, w).unwrap() {
                        continue;
                    }
                    used[w as usize] = true;
                    if end == 0 {
                        path.push(w);
                    } else {
                        path.insert(0, w);
                    }
                    extend(x, rel, used, path, chains, covered, max_chains, len, best);
                    if end == 0 {
                        path.pop();
                    } else {
                        path.remove(0);
                    }
                    used[w as usize] = false;
                }
            }
        }
        let mut best = 0;
        rec(x, relation, &mut vec![false; x as usize + 1], 0, 0, max_chains, len, &mut best);
        best
    }

    #[test]
    fn packings_match_family_enumeration() {
        for x in 1..=7u64 {
            for rel in [Relation::Divisor, Relation::LcmBounded { bound: x }] {
                let g = SmallGraph::on_range(x, rel).unwrap();
                for z in 1..=x as usize {
                    let got = max_equal_packing(&g, z).len() as u64 * z as u64;
                    assert_eq!(got, families_brute(x, rel, None, Some(z)), "x = {x}, z = {z}, {rel}");
                }
                let table = CoverTable::new(&g).unwrap();
                for y in 1..=x {
                    assert_eq!(table.best_with(y).0, families_brute(x, rel, Some(y), None), "x = {x}, y = {y}, {rel}");
                }
            }
        }
    }

    #[test]
    fn cover_examples() {
        let f = brute_big_f(10, 10, &limits()).unwrap();
        assert_eq!(f.value, 10);
        f.check_witness().unwrap();
        let f1 = brute_big_f(10, 1, &limits()).unwrap();
        assert_eq!(f1.value, brute_f(10, &limits()).unwrap().value);
        let t = brute_t(12, 3, &limits()).unwrap();
        let g = brute_big_g(12, 4, &limits()).unwrap();
        assert!(t.value <= g.value);
        t.check_witness().unwrap();
        g.check_witness().unwrap();
    }

    #[test]
    fn json_record_shape() {
        let r = brute_f(3, &limits()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["quantity"], "f");
        assert_eq!(v["value"], 3);
        assert!(v.get("y").is_none());
        let back: OracleResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn witnesses_are_reproducible() {
        for x in [6u64, 12, 20] {
            assert_eq!(brute_f(x, &limits()).unwrap(), brute_f(x, &limits()).unwrap());
        }
    }
}
