//! Command-line front end. Every subcommand is a thin adapter over the library.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 identity violation,
//! 3 validation failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{eta, harmonic_sum_b, lemma211_search, tail_sum_b};
use crate::chain::{decompose_components, read_chains, write_chains, Chain, Relation};
use crate::construct::{chain_in_a, geometric_chains, lift_reductions, pack_chains, ChainPacking};
use crate::error::Error;
use crate::number::Sieve;
use crate::oracle::{brute, OracleLimits, OracleResult, Quantity};
use crate::report::{
    corridor_rows, doubling_grid, pack_rows, sweep_points, ReportMeta, SweepReport, SweepRow,
};
use crate::sets::{enumerate_a, enumerate_a_xzt, enumerate_b, sweep_identities};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IDENTITY: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "divgraph", version, about = "Divisor-graph chains, Schinzel-Szekeres sets and chain packings")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps; 1 gives bit-exact output.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    /// Chain text format (chain and pack only).
    Chains,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// Every integer in the range.
    All,
    /// `from, 2 from, 4 from, ...` and `to`.
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundsKind {
    Sets,
    Lift,
    Pack,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S(n) and the largest ratio of consecutive divisors.
    Sn {
        #[arg(long)]
        n: u64,
        /// Report every integer from n to this bound.
        #[arg(long)]
        to: Option<u64>,
    },
    /// Members and sizes of A(x), B(x) and optionally A(x, z, t).
    Sets {
        #[arg(long)]
        x: u64,
        #[arg(long, requires = "t")]
        z: Option<u64>,
        #[arg(long, requires = "z")]
        t: Option<u64>,
        /// Omit member lists.
        #[arg(long)]
        counts_only: bool,
    },
    /// Floor and parity identity sweep.
    Identities {
        #[arg(long, default_value_t = 2)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long, value_enum, default_value_t = Grid::All)]
        grid: Grid,
    },
    /// Harmonic sums over B(x) and their tails.
    Sums {
        #[arg(long, default_value_t = 1000)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// Tail parameters t (comma separated).
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 10.0, 100.0])]
        t: Vec<f64>,
    },
    /// Minimum of eta(s, t) over a logarithmic grid plus random points.
    Eta {
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 1e6)]
        t_max: f64,
        #[arg(long, default_value_t = 10_000)]
        random: usize,
    },
    /// Random search for the smallest weighted-sum margins.
    Lemma211 {
        #[arg(long, value_delimiter = ',', default_values_t = [10_000u64])]
        x: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = [4u64, 16, 64, 256])]
        ratios: Vec<u64>,
        #[arg(long, default_value_t = 10_000)]
        families: usize,
    },
    /// Long chain inside A(x), or validation and components of a chain file.
    Chain {
        #[arg(long)]
        x: u64,
        /// Validate the chains of this file instead of building one.
        #[arg(long)]
        validate: Option<PathBuf>,
        /// Emit the components outside A(x).
        #[arg(long)]
        components: bool,
    },
    /// Disjoint divisor chains of common length z.
    Pack {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        z: usize,
        /// Only the geometric chains.
        #[arg(long)]
        geometric: bool,
    },
    /// Exact values at tiny scale.
    Oracle {
        /// One of f, g, f_a, R, T, F, G.
        #[arg(long)]
        quantity: String,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: Option<u64>,
        #[arg(long)]
        z: Option<u64>,
        #[arg(long, default_value_t = OracleLimits::default().max_path)]
        max_path: u64,
        #[arg(long, default_value_t = OracleLimits::default().max_pack)]
        max_pack: u64,
    },
    /// Corridor and reduction reports.
    Bounds {
        #[arg(long, value_enum, default_value_t = BoundsKind::Sets)]
        kind: BoundsKind,
        #[arg(long, default_value_t = 1000)]
        from: u64,
        #[arg(long, default_value_t = 10_000_000)]
        to: u64,
        /// Chain counts for `lift`.
        #[arg(long, default_value_t = 2)]
        y: u64,
        /// Chain lengths (comma separated) for `lift` and `pack`.
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8, 16])]
        z: Vec<usize>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Identity(String),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Identity(_) => EXIT_IDENTITY,
            Failure::Validation(_) => EXIT_VALIDATION,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Identity(m) | Failure::Validation(m) => m,
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn csv_of<T: Serialize>(rows: &[T]) -> std::result::Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Usage(e.to_string()))
}

fn json_of<T: Serialize>(value: &T) -> std::result::Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Renders rows as CSV or, in JSON mode, `json` (usually the rows with metadata).
fn tabular<T: Serialize, J: Serialize>(fmt: Format, rows: &[T], json: &J) -> std::result::Result<String, Failure> {
    match fmt {
        Format::Csv => csv_of(rows),
        Format::Json => json_of(json),
        Format::Chains => Err(Failure::Usage("--format chains only applies to chain and pack".into())),
    }
}

fn sieve_for(x: u64) -> std::result::Result<Sieve, Failure> {
    Ok(Sieve::for_bound(x.max(2))?)
}

#[derive(Serialize)]
struct SnRow {
    n: u64,
    #[serde(rename = "S_n")]
    s_n: u64,
    /// Largest ratio of consecutive divisors as `p/q`; empty for `n = 1`.
    max_ratio: String,
}

#[derive(Serialize)]
struct SetRow {
    set: String,
    x: u64,
    count: usize,
    members: String,
}

#[derive(Serialize)]
struct SumsRow {
    x: u64,
    #[serde(rename = "B_x")]
    count_b: u64,
    sum_inv_b: f64,
    harmonic_drift: f64,
    t: f64,
    tail_sum: f64,
    /// `tail_sum * log x / log t`.
    tail_log_ratio: f64,
}

#[derive(Serialize)]
struct EtaRow {
    t: f64,
    eta_min: f64,
    s_at_min: f64,
}

#[derive(Serialize)]
struct EtaReport {
    grid: Vec<EtaRow>,
    random_points: usize,
    random_eta_min: f64,
    threshold: f64,
    ok: bool,
}

#[derive(Serialize)]
struct ChainRow {
    index: usize,
    length: usize,
    elements: String,
}

#[derive(Serialize)]
struct ValidationRow {
    index: usize,
    length: usize,
    ok: bool,
    violation: String,
}

#[derive(Serialize)]
struct ComponentRow {
    start: usize,
    end: usize,
    b_label: u64,
}

#[derive(Serialize)]
struct OracleRow {
    quantity: String,
    x: u64,
    y: String,
    z: String,
    value: u64,
    witness: String,
}

#[derive(Serialize)]
struct LiftRow {
    reduction: String,
    x: u64,
    y: String,
    z: String,
    constructive: u64,
    oracle_lhs: String,
    oracle_rhs: String,
    holds: String,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn chain_rows(chains: &[Chain]) -> Vec<ChainRow> {
    chains
        .iter()
        .enumerate()
        .map(|(index, c)| ChainRow {
            index,
            length: c.len(),
            elements: join(c.elements()),
        })
        .collect()
}

fn emit_packing(fmt: Format, p: &ChainPacking) -> std::result::Result<String, Failure> {
    p.audit().map_err(Failure::Validation)?;
    match fmt {
        Format::Chains => Ok(p.to_text()),
        Format::Json => json_of(p),
        Format::Csv => csv_of(&chain_rows(&p.chains)),
    }
}

/// Lowest `eta` over `grid` log-spaced `t` in `[1, t_max]` and `grid` log-spaced
/// `s` in `(0, t]`, plus `random` uniform points in log scale.
pub fn eta_scan(grid: usize, t_max: f64, random: usize, seed: u64) -> crate::error::Result<(Vec<(f64, f64, f64)>, f64)> {
    use rand::{Rng, SeedableRng};
    let grid = grid.max(2);
    let lt = t_max.ln();
    let mut rows = Vec::with_capacity(grid);
    for i in 0..grid {
        let t = (lt * i as f64 / (grid - 1) as f64).exp().min(t_max).max(1.0);
        // s from t·10^-6 up to t
        let ls_lo = t.ln() - 6.0 * std::f64::consts::LN_10;
        let mut best = (f64::INFINITY, 0.0);
        for j in 0..grid {
            let s = (ls_lo + (t.ln() - ls_lo) * j as f64 / (grid - 1) as f64).exp().min(t);
            let e = eta(s, t)?;
            if e < best.0 {
                best = (e, s);
            }
        }
        rows.push((t, best.0, best.1));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rmin = f64::INFINITY;
    for _ in 0..random {
        let t = (rng.gen::<f64>() * lt).exp().clamp(1.0, t_max);
        let s = (t.ln() - rng.gen::<f64>() * 30.0).exp().min(t);
        if s > 0.0 {
            rmin = rmin.min(eta(s, t)?);
        }
    }
    Ok((rows, rmin))
}

/// Floating-point slack allowed below zero for `eta`.
pub const ETA_THRESHOLD: f64 = -1e-12;

fn execute(cli: &Cli) -> std::result::Result<String, Failure> {
    let fmt = cli.common.format;
    let threads = cli.common.threads.max(1);
    let seed = cli.common.seed;
    let started = Instant::now();
    match &cli.command {
        Command::Sn { n, to } => {
            let hi = to.unwrap_or(*n);
            if *n == 0 || hi < *n {
                return Err(Failure::Usage("need 1 <= n <= to".into()));
            }
            // larger n fall back to trial division
            let sieve = Sieve::new(hi.clamp(2, 1 << 20))?;
            let mut rows = Vec::new();
            for k in *n..=hi {
                let s_n = sieve.schinzel_szekeres(k)?;
                let max_ratio = if k >= 2 { sieve.max_divisor_ratio(k)?.to_string() } else { String::new() };
                rows.push(SnRow { n: k, s_n, max_ratio });
            }
            tabular(fmt, &rows, &rows)
        }
        Command::Sets { x, z, t, counts_only } => {
            let sieve = sieve_for(*x)?;
            let mut rows = vec![
                ("A".to_string(), enumerate_a(&sieve, *x)?),
                ("B".to_string(), enumerate_b(&sieve, *x)?),
            ];
            if let (Some(z), Some(t)) = (z, t) {
                rows.push((format!("A(x,{z},{t})"), enumerate_a_xzt(&sieve, *x, *z, *t)?));
            }
            let rows: Vec<SetRow> = rows
                .into_iter()
                .map(|(set, m)| SetRow {
                    set,
                    x: *x,
                    count: m.len(),
                    members: if *counts_only { String::new() } else { join(&m) },
                })
                .collect();
            tabular(fmt, &rows, &rows)
        }
        Command::Identities { from, to, grid } => {
            if *from == 0 || from > to {
                return Err(Failure::Usage(format!("bad range [{from}, {to}]")));
            }
            let sieve = sieve_for(*to)?;
            let rows: Vec<SweepRow> = match grid {
                Grid::All => sweep_identities(&sieve, *from, *to, threads)?.iter().map(SweepRow::from_row).collect(),
                Grid::Doubling => sweep_points(&sieve, &doubling_grid(*from, *to), threads)?,
            };
            let bad: Vec<u64> = rows.iter().filter(|r| r.violates()).map(|r| r.x).collect();
            let report = SweepReport {
                meta: ReportMeta::new(seed, threads, started.elapsed().as_millis()),
                rows,
            };
            if let Some(&x) = bad.first() {
                return Err(Failure::Identity(format!("{} identity violations, first at x = {x}", bad.len())));
            }
            tabular(fmt, &report.rows, &report)
        }
        Command::Sums { from, to, t } => {
            if *from < 2 || from > to {
                return Err(Failure::Usage(format!("sums need 2 <= from <= to, got [{from}, {to}]")));
            }
            let sieve = sieve_for(*to)?;
            let mut rows = Vec::new();
            for x in doubling_grid(*from, *to) {
                let sum = harmonic_sum_b(&sieve, x)?;
                let count_b = enumerate_b(&sieve, x)?.len() as u64;
                let lx = (x as f64).ln();
                for &tt in t {
                    if tt > x as f64 {
                        continue;
                    }
                    let tail = tail_sum_b(&sieve, x, tt)?;
                    rows.push(SumsRow {
                        x,
                        count_b,
                        sum_inv_b: sum,
                        harmonic_drift: (sum - 1.0) * lx,
                        t: tt,
                        tail_sum: tail,
                        tail_log_ratio: tail * lx / tt.ln(),
                    });
                }
            }
            tabular(fmt, &rows, &rows)
        }
        Command::Eta { grid, t_max, random } => {
            if !(*t_max >= 1.0) {
                return Err(Failure::Usage("t-max must be at least 1".into()));
            }
            let (rows, rmin) = eta_scan(*grid, *t_max, *random, seed)?;
            let rows: Vec<EtaRow> = rows
                .into_iter()
                .map(|(t, eta_min, s_at_min)| EtaRow { t, eta_min, s_at_min })
                .collect();
            let gmin = rows.iter().map(|r| r.eta_min).fold(f64::INFINITY, f64::min);
            let ok = gmin >= ETA_THRESHOLD && rmin >= ETA_THRESHOLD;
            let report = EtaReport {
                grid: rows,
                random_points: *random,
                random_eta_min: rmin,
                threshold: ETA_THRESHOLD,
                ok,
            };
            let text = tabular(fmt, &report.grid, &report)?;
            if !ok {
                return Err(Failure::Validation(format!("eta fell below {ETA_THRESHOLD}: grid {gmin}, random {rmin}")));
            }
            Ok(text)
        }
        Command::Lemma211 { x, ratios, families } => {
            let top = x.iter().copied().max().unwrap_or(2);
            let sieve = sieve_for(top)?;
            let mut reports = Vec::new();
            for &xv in x {
                reports.push(lemma211_search(&sieve, xv, ratios, *families, seed)?);
            }
            let rows: Vec<_> = reports.iter().flat_map(|r| r.rows.clone()).collect();
            if let Some(r) = rows.iter().find(|r| r.well_formed != r.families) {
                return Err(Failure::Validation(format!(
                    "{} of {} families malformed at x = {}, ratio {}",
                    r.families - r.well_formed,
                    r.families,
                    r.x,
                    r.ratio
                )));
            }
            tabular(fmt, &rows, &reports)
        }
        Command::Chain { x, validate, components } => {
            let sieve = sieve_for(*x)?;
            let chains = match validate {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    read_chains(&text)?.chains
                }
                None => vec![chain_in_a(&sieve, *x)?],
            };
            if validate.is_some() && !*components {
                let rows: Vec<ValidationRow> = chains
                    .iter()
                    .enumerate()
                    .map(|(index, c)| {
                        let v = c.validate();
                        ValidationRow {
                            index,
                            length: c.len(),
                            ok: v.is_ok(),
                            violation: v.err().map(|e| e.to_string()).unwrap_or_default(),
                        }
                    })
                    .collect();
                let text = tabular(fmt, &rows, &rows)?;
                if rows.iter().any(|r| !r.ok) {
                    return Err(Failure::Validation(text));
                }
                return Ok(text);
            }
            if *components {
                let mut rows = Vec::new();
                for c in &chains {
                    c.validate().map_err(|e| Failure::Validation(e.to_string()))?;
                    let d = decompose_components(&sieve, c, *x)?;
                    rows.extend(d.components.iter().map(|k| ComponentRow {
                        start: k.start,
                        end: k.end,
                        b_label: k.label,
                    }));
                }
                return tabular(fmt, &rows, &rows);
            }
            match fmt {
                Format::Chains => Ok(write_chains(Relation::Divisor, &chains)),
                Format::Json => json_of(&chains),
                Format::Csv => csv_of(&chain_rows(&chains)),
            }
        }
        Command::Pack { x, z, geometric } => {
            if *x == 0 || *z == 0 {
                return Err(Failure::Usage("x and z must be positive".into()));
            }
            let p = if *geometric {
                geometric_chains(*x, *z)
            } else {
                pack_chains(&sieve_for(*x)?, *x, *z)?
            };
            emit_packing(fmt, &p)
        }
        Command::Oracle {
            quantity,
            x,
            y,
            z,
            max_path,
            max_pack,
        } => {
            let q = Quantity::parse(quantity).ok_or_else(|| Failure::Usage(format!("unknown quantity {quantity:?}")))?;
            let limits = OracleLimits {
                max_path: *max_path,
                max_pack: *max_pack,
            };
            let param = match q {
                Quantity::DisjointF | Quantity::DisjointG => *y,
                Quantity::EqualR | Quantity::EqualT => *z,
                _ => None,
            };
            let r: OracleResult = brute(&sieve_for(*x)?, q, *x, param, &limits)?;
            r.check_witness().map_err(Failure::Validation)?;
            let row = OracleRow {
                quantity: q.to_string(),
                x: r.x,
                y: opt(r.y),
                z: opt(r.z),
                value: r.value,
                witness: r.witness.iter().map(|c| join(c.elements())).collect::<Vec<_>>().join(";"),
            };
            tabular(fmt, &[row], &r)
        }
        Command::Bounds { kind, from, to, y, z } => {
            if *from == 0 || from > to {
                return Err(Failure::Usage(format!("bad range [{from}, {to}]")));
            }
            let grid = doubling_grid(*from, *to);
            match kind {
                BoundsKind::Sets => {
                    let sieve = sieve_for(*to)?;
                    let rows = corridor_rows(&sweep_points(&sieve, &grid, threads)?);
                    let text = tabular(fmt, &rows, &rows)?;
                    if let Some(r) = rows.iter().find(|r| !r.inside()) {
                        return Err(Failure::Validation(format!("x = {} leaves the frozen corridor\n{text}", r.x)));
                    }
                    Ok(text)
                }
                BoundsKind::Pack => {
                    let sieve = sieve_for(*to)?;
                    let rows = pack_rows(&sieve, &grid, z)?;
                    tabular(fmt, &rows, &rows)
                }
                BoundsKind::Lift => {
                    let sieve = sieve_for(*to)?;
                    let limits = OracleLimits::default();
                    let mut rows = Vec::new();
                    for &x in &grid {
                        for &zz in z {
                            if *y > x {
                                continue;
                            }
                            rows.extend(lift_reductions(&sieve, x, *y, zz, &limits)?);
                        }
                    }
                    if let Some(r) = rows.iter().find(|r| r.holds == Some(false)) {
                        return Err(Failure::Validation(format!("{} fails at x = {}", r.reduction, r.x)));
                    }
                    let flat: Vec<LiftRow> = rows
                        .iter()
                        .map(|r| LiftRow {
                            reduction: r.reduction.clone(),
                            x: r.x,
                            y: opt(r.y),
                            z: opt(r.z),
                            constructive: r.constructive,
                            oracle_lhs: opt(r.oracle_lhs),
                            oracle_rhs: opt(r.oracle_rhs),
                            holds: opt(r.holds),
                        })
                        .collect();
                    tabular(fmt, &flat, &rows)
                }
            }
        }
    }
}

fn emit(cli: &Cli, text: &str, stdout: &mut dyn Write) -> Outcome {
    match &cli.common.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(e.to_string())),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let result = execute(&cli).and_then(|text| emit(&cli, &text, stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "divgraph: {}", f.message());
            f.code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
