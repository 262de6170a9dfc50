//! Report rows for the command line and the frozen regression corridors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{geometric_chains, pack_chains};
use crate::error::{Error, Result};
use crate::number::Sieve;
use crate::sets::{set_stats, SetSweepRow};

/// `from, 2 from, 4 from, ...` below `to`, then `to` itself.
pub fn doubling_grid(from: u64, to: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = from.max(1);
    while x < to {
        out.push(x);
        x = x.saturating_mul(2);
    }
    if from <= to {
        out.push(to);
    }
    out
}

/// `points` strictly increasing integers spaced geometrically over `[from, to]`.
/// Collisions from rounding at the low end are bumped upward; fewer points come
/// back only when the interval is too short to hold them.
pub fn geometric_points(from: u64, to: u64, points: usize) -> Vec<u64> {
    if points <= 1 || from >= to {
        return vec![to.max(from)];
    }
    let (lf, lt) = ((from as f64).ln(), (to as f64).ln());
    let mut out: Vec<u64> = Vec::with_capacity(points);
    for i in 0..points {
        let ideal = (lf + (lt - lf) * i as f64 / (points - 1) as f64).exp().round() as u64;
        let room = to - (points - 1 - i).min((to - from) as usize) as u64;
        let v = ideal.clamp(from, to).min(room);
        let v = out.last().map_or(v, |&p| v.max(p + 1));
        if v > to {
            break;
        }
        out.push(v);
    }
    out
}

/// One identity-sweep row with the normalised counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: u64,
    #[serde(rename = "A_x")]
    pub count_a: u64,
    #[serde(rename = "B_x")]
    pub count_b: u64,
    pub sum_inv_b: f64,
    /// `A(x) log x / x`.
    pub a_log_ratio: f64,
    /// `B(x) log x / x`.
    pub b_log_ratio: f64,
    /// `(Σ 1/b - 1) log x`.
    pub harmonic_drift: f64,
    pub floor_residual: i64,
    pub parity_residual: i64,
}

impl SweepRow {
    pub fn from_row(r: &SetSweepRow) -> Self {
        let lx = (r.x as f64).ln();
        let x = r.x as f64;
        SweepRow {
            x: r.x,
            count_a: r.count_a,
            count_b: r.count_b,
            sum_inv_b: r.harmonic_b,
            a_log_ratio: r.count_a as f64 * lx / x,
            b_log_ratio: r.count_b as f64 * lx / x,
            harmonic_drift: (r.harmonic_b - 1.0) * lx,
            floor_residual: r.floor_identity_residual,
            parity_residual: r.parity_identity_residual,
        }
    }

    /// Whether a residual is nonzero. The parity identity is not asserted at `x = 1`.
    pub fn violates(&self) -> bool {
        self.floor_residual != 0 || (self.x >= 2 && self.parity_residual != 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub version: String,
    pub seed: u64,
    pub threads: usize,
    pub elapsed_ms: u128,
}

impl ReportMeta {
    pub fn new(seed: u64, threads: usize, elapsed_ms: u128) -> Self {
        ReportMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            threads,
            elapsed_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub meta: ReportMeta,
    pub rows: Vec<SweepRow>,
}

/// Single-pass statistics at each listed `x`, in input order.
pub fn sweep_points(sieve: &Sieve, xs: &[u64], threads: usize) -> Result<Vec<SweepRow>> {
    let one = |&x: &u64| set_stats(sieve, x).map(|s| SweepRow::from_row(&s.row()));
    if threads <= 1 {
        return xs.iter().map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    pool.install(|| xs.par_iter().map(one).collect())
}

/// A pilot measurement frozen as a regression value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub x: u64,
    pub count_a: u64,
    pub count_b: u64,
    pub a_log_ratio: f64,
    pub b_log_ratio: f64,
    pub harmonic_drift: f64,
}

/// Pilot values at `10^3`, `10^5` and `10^7`.
pub const ANCHORS: [Anchor; 3] = [
    Anchor {
        x: 1_000,
        count_a: 215,
        count_b: 296,
        a_log_ratio: 1.4851673849811593,
        b_log_ratio: 2.0446955625787124,
        harmonic_drift: -0.5800793740555981,
    },
    Anchor {
        x: 100_000,
        count_a: 13_254,
        count_b: 18_582,
        a_log_ratio: 1.5259231411271543,
        b_log_ratio: 2.139331809900768,
        harmonic_drift: -0.566836452455145,
    },
    Anchor {
        x: 10_000_000,
        count_a: 945_314,
        count_b: 1_332_379,
        a_log_ratio: 1.5236661472190014,
        b_log_ratio: 2.1475412165328196,
        harmonic_drift: -0.5595260746453333,
    },
];

/// Closed interval a monitored ratio must stay in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub lo: f64,
    pub hi: f64,
}

impl Corridor {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Widening applied to the anchor spread: `[min - w, max + w]` with `w` this
/// fraction of the larger absolute anchor value.
pub const CORRIDOR_SLACK: f64 = 0.25;

fn corridor(values: [f64; 3]) -> Corridor {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = CORRIDOR_SLACK * lo.abs().max(hi.abs());
    Corridor { lo: lo - w, hi: hi + w }
}

/// Corridors for `A(x) log x / x`, `B(x) log x / x` and the harmonic drift.
pub fn corridors() -> [Corridor; 3] {
    let pick = |f: fn(&Anchor) -> f64| [f(&ANCHORS[0]), f(&ANCHORS[1]), f(&ANCHORS[2])];
    [
        corridor(pick(|a| a.a_log_ratio)),
        corridor(pick(|a| a.b_log_ratio)),
        corridor(pick(|a| a.harmonic_drift)),
    ]
}

/// Relative tolerance for anchor reproduction outside single-threaded mode.
pub const ANCHOR_REL_TOL: f64 = 1e-9;

/// Compares a fresh row against its anchor; exact when `exact` is set.
pub fn matches_anchor(row: &SweepRow, anchor: &Anchor, exact: bool) -> bool {
    let close = |a: f64, b: f64| {
        if exact {
            a.to_bits() == b.to_bits()
        } else {
            (a - b).abs() <= ANCHOR_REL_TOL * b.abs().max(f64::MIN_POSITIVE)
        }
    };
    row.x == anchor.x
        && row.count_a == anchor.count_a
        && row.count_b == anchor.count_b
        && close(row.a_log_ratio, anchor.a_log_ratio)
        && close(row.b_log_ratio, anchor.b_log_ratio)
        && close(row.harmonic_drift, anchor.harmonic_drift)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorRow {
    pub x: u64,
    #[serde(rename = "A_x")]
    pub count_a: u64,
    #[serde(rename = "B_x")]
    pub count_b: u64,
    pub a_log_ratio: f64,
    pub b_log_ratio: f64,
    pub harmonic_drift: f64,
    pub a_in_corridor: bool,
    pub b_in_corridor: bool,
    pub drift_in_corridor: bool,
}

impl CorridorRow {
    pub fn inside(&self) -> bool {
        self.a_in_corridor && self.b_in_corridor && self.drift_in_corridor
    }
}

/// Checks every sweep row against the frozen corridors.
pub fn corridor_rows(rows: &[SweepRow]) -> Vec<CorridorRow> {
    let [ca, cb, cd] = corridors();
    rows.iter()
        .map(|r| CorridorRow {
            x: r.x,
            count_a: r.count_a,
            count_b: r.count_b,
            a_log_ratio: r.a_log_ratio,
            b_log_ratio: r.b_log_ratio,
            harmonic_drift: r.harmonic_drift,
            a_in_corridor: ca.contains(r.a_log_ratio),
            b_in_corridor: cb.contains(r.b_log_ratio),
            drift_in_corridor: cd.contains(r.harmonic_drift),
        })
        .collect()
}

/// Packing coverage normalised as `covered log z / x` (`log⁺ z = max(1, log z)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackRow {
    pub x: u64,
    pub z: usize,
    pub chains: usize,
    pub covered: u64,
    pub geometric: u64,
    pub scaled: f64,
}

pub fn pack_rows(sieve: &Sieve, xs: &[u64], zs: &[usize]) -> Result<Vec<PackRow>> {
    let mut out = Vec::with_capacity(xs.len() * zs.len());
    for &x in xs {
        for &z in zs {
            let p = pack_chains(sieve, x, z)?;
            p.audit().map_err(Error::Precondition)?;
            let logz = (z as f64).ln().max(1.0);
            out.push(PackRow {
                x,
                z,
                chains: p.chains.len(),
                covered: p.covered,
                geometric: geometric_chains(x, z).covered,
                scaled: p.covered as f64 * logz / x as f64,
            });
        }
    }
    Ok(out)
}
