//! Chains for the divisibility relation and for the bounded-lcm relation, and
//! the decomposition of a chain into components outside `A(x)`.
//!
//! Text format, one chain per line:
//!
//! ```text
//! #chains relation=divisor
//! 3 1 2 4
//! 6 12 24
//! ```
//!
//! The bounded-lcm relation writes `#chains relation=lcm bound=36`. Packing
//! files append a trailer `#packing x=24 z=3 chains=2 covered=6`.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::{checked_lcm, Sieve};
use crate::sets::{in_a, in_b, unique_b_divisor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Relation {
    /// `a | b` or `b | a`.
    Divisor,
    /// `lcm(a, b) <= bound`, on integers `<= bound`.
    LcmBounded { bound: u64 },
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Divisor => f.write_str("relation=divisor"),
            Relation::LcmBounded { bound } => write!(f, "relation=lcm bound={bound}"),
        }
    }
}

pub fn related_f(a: u64, b: u64) -> bool {
    a != 0 && b != 0 && (b % a == 0 || a % b == 0)
}

/// `lcm(a, b) <= x`. Overflow is reported, never wrapped.
pub fn related_g(a: u64, b: u64, x: u64) -> Result<bool> {
    let l = checked_lcm(a, b).ok_or(Error::Overflow("lcm"))?;
    Ok(a != 0 && b != 0 && l <= x)
}

impl Relation {
    pub fn related(&self, a: u64, b: u64) -> Result<bool> {
        match *self {
            Relation::Divisor => Ok(related_f(a, b)),
            Relation::LcmBounded { bound } => related_g(a, b, bound),
        }
    }
}

/// Why a sequence fails to be a chain. Indices point at the first offender.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum ChainViolation {
    #[error("empty chain")]
    Empty,
    #[error("element {value} at index {index} is not a positive integer")]
    NonPositive { index: usize, value: u64 },
    #[error("element {value} at index {index} repeats an earlier element")]
    Duplicate { index: usize, value: u64 },
    #[error("elements at indices {index} and {} are not related", index + 1)]
    Unrelated { index: usize },
    #[error("element {value} at index {index} exceeds the bound {bound}")]
    BoundExceeded { index: usize, value: u64, bound: u64 },
    #[error("lcm overflow between indices {index} and {}", index + 1)]
    Overflow { index: usize },
}

/// An ordered sequence of distinct positive integers with its relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chain {
    elements: Vec<u64>,
    relation: Relation,
}

impl Chain {
    /// Wraps a sequence without checking it; see [`Chain::validate`].
    pub fn new(elements: Vec<u64>, relation: Relation) -> Self {
        Chain { elements, relation }
    }

    pub fn divisor(elements: Vec<u64>) -> Self {
        Chain::new(elements, Relation::Divisor)
    }

    /// Builds and validates in one step.
    pub fn checked(elements: Vec<u64>, relation: Relation) -> std::result::Result<Self, ChainViolation> {
        let c = Chain::new(elements, relation);
        c.validate()?;
        Ok(c)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<u64> {
        self.elements
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    /// `ℓ(C)`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn validate(&self) -> std::result::Result<(), ChainViolation> {
        if self.elements.is_empty() {
            return Err(ChainViolation::Empty);
        }
        let mut seen = std::collections::HashSet::with_capacity(self.elements.len());
        for (index, &value) in self.elements.iter().enumerate() {
            if value == 0 {
                return Err(ChainViolation::NonPositive { index, value });
            }
            if let Relation::LcmBounded { bound } = self.relation {
                if value > bound {
                    return Err(ChainViolation::BoundExceeded { index, value, bound });
                }
            }
            if !seen.insert(value) {
                return Err(ChainViolation::Duplicate { index, value });
            }
        }
        for (index, w) in self.elements.windows(2).enumerate() {
            match self.relation.related(w[0], w[1]) {
                Ok(true) => {}
                Ok(false) => return Err(ChainViolation::Unrelated { index }),
                Err(_) => return Err(ChainViolation::Overflow { index }),
            }
        }
        Ok(())
    }

    /// A borrowed window `range` of this chain.
    pub fn view(&self, range: Range<usize>) -> ChainView<'_> {
        assert!(range.end <= self.len(), "view past the end of the chain");
        ChainView { chain: self, range }
    }

    /// `k · C`, which stays a chain for the divisor relation.
    pub fn scaled(&self, k: u64) -> Result<Chain> {
        let elements = self
            .elements
            .iter()
            .map(|&e| e.checked_mul(k).ok_or(Error::Overflow("chain lift")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Chain::new(elements, self.relation))
    }

    pub fn reversed(&self) -> Chain {
        let mut elements = self.elements.clone();
        elements.reverse();
        Chain::new(elements, self.relation)
    }

    /// Space-separated elements.
    pub fn to_line(&self) -> String {
        let mut s = String::with_capacity(self.elements.len() * 6);
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&e.to_string());
        }
        s
    }
}

/// A contiguous window of a chain.
#[derive(Debug, Clone)]
pub struct ChainView<'a> {
    chain: &'a Chain,
    range: Range<usize>,
}

impl<'a> ChainView<'a> {
    pub fn range(&self) -> Range<usize> {
        self.range.clone()
    }

    pub fn elements(&self) -> &'a [u64] {
        &self.chain.elements[self.range.clone()]
    }

    pub fn to_chain(&self) -> Chain {
        Chain::new(self.elements().to_vec(), self.chain.relation)
    }
}

/// A maximal run of chain elements outside `A(x)`, with the element of `B(x)`
/// dividing all of them. Indices are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub start: usize,
    pub end: usize,
    pub label: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentDecomposition {
    pub x: u64,
    pub components: Vec<Component>,
}

/// Splits `chain` into its components relative to `A(x)` and labels each with
/// its `B(x)`-divisor, checked against every element of the run.
///
/// A label that fails to divide some element of its run means the chain is not
/// a valid chain of integers `<= x`; it is reported as a precondition error.
pub fn decompose_components(sieve: &Sieve, chain: &Chain, x: u64) -> Result<ComponentDecomposition> {
    if let Some(&big) = chain.elements().iter().find(|&&e| e > x || e == 0) {
        return Err(Error::Precondition(format!("element {big} is not in [1, {x}]")));
    }
    let mut components = Vec::new();
    let mut start: Option<usize> = None;
    let els = chain.elements();
    for i in 0..=els.len() {
        let outside = i < els.len() && !in_a(sieve, els[i], x)?;
        match (outside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let label = unique_b_divisor(sieve, els[s], x)?;
                debug_assert!(in_b(sieve, label, x)?);
                if let Some(&bad) = els[s..i].iter().find(|&&e| e % label != 0) {
                    return Err(Error::Precondition(format!(
                        "component label {label} does not divide {bad}; not a chain of integers <= {x}"
                    )));
                }
                components.push(Component {
                    start: s,
                    end: i - 1,
                    label,
                });
                start = None;
            }
            _ => {}
        }
    }
    Ok(ComponentDecomposition { x, components })
}

/// Writes chains in the text format described at module level.
pub fn write_chains(relation: Relation, chains: &[Chain]) -> String {
    let mut out = format!("#chains {relation}\n");
    for c in chains {
        out.push_str(&c.to_line());
        out.push('\n');
    }
    out
}

fn parse_kv<'a>(tokens: impl Iterator<Item = &'a str>, line: usize) -> Result<Vec<(&'a str, &'a str)>> {
    tokens
        .map(|t| {
            t.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected key=value, got {t:?}"),
            })
        })
        .collect()
}

fn parse_u64(v: &str, line: usize) -> Result<u64> {
    v.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("not an unsigned integer: {v:?}"),
    })
}

/// Parses the header line into a relation.
fn parse_header(header: &str, line: usize) -> Result<Relation> {
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("#chains") {
        return Err(Error::Parse {
            line,
            msg: "missing '#chains' header".into(),
        });
    }
    let kv = parse_kv(tokens, line)?;
    let get = |k: &str| kv.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
    match get("relation") {
        Some("divisor") => Ok(Relation::Divisor),
        Some("lcm") => {
            let bound = get("bound").ok_or_else(|| Error::Parse {
                line,
                msg: "lcm relation needs bound=".into(),
            })?;
            Ok(Relation::LcmBounded {
                bound: parse_u64(bound, line)?,
            })
        }
        other => Err(Error::Parse {
            line,
            msg: format!("unknown relation {other:?}"),
        }),
    }
}

/// Trailer of a packing file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingSummary {
    pub x: u64,
    pub z: usize,
    pub chains: usize,
    pub covered: u64,
}

impl fmt::Display for PackingSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#packing x={} z={} chains={} covered={}",
            self.x, self.z, self.chains, self.covered
        )
    }
}

/// Contents of a chain or packing file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFile {
    pub relation: Relation,
    pub chains: Vec<Chain>,
    pub summary: Option<PackingSummary>,
}

pub fn read_chains(text: &str) -> Result<ChainFile> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let relation = parse_header(header.trim(), hl + 1)?;
    let mut chains = Vec::new();
    let mut summary = None;
    for (i, l) in lines {
        let l = l.trim();
        let line = i + 1;
        if let Some(rest) = l.strip_prefix("#packing") {
            let kv = parse_kv(rest.split_whitespace(), line)?;
            let get = |k: &str| -> Result<u64> {
                let v = kv.iter().find(|(key, _)| *key == k).map(|(_, v)| *v).ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("packing trailer lacks {k}="),
                })?;
                parse_u64(v, line)
            };
            summary = Some(PackingSummary {
                x: get("x")?,
                z: get("z")? as usize,
                chains: get("chains")? as usize,
                covered: get("covered")?,
            });
            continue;
        }
        if l.starts_with('#') {
            continue;
        }
        let elements = l.split_whitespace().map(|t| parse_u64(t, line)).collect::<Result<Vec<_>>>()?;
        chains.push(Chain::new(elements, relation));
    }
    Ok(ChainFile {
        relation,
        chains,
        summary,
    })
}
