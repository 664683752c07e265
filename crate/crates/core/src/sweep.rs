//! Grid sweeps over `(q, P, S, a)` with deterministic row order and
//! CSV / JSON rendering.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{build_modulus_context, build_sieve, gcd, SieveTables};
use crate::asymptotics::{CountReport, Regime, RegimeConfig};
use crate::counting::{ProblemInstance, ResidueCounter};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_INSTANCES: u64 = 100_000;

pub const CSV_HEADER: [&str; 12] = [
    "a",
    "q",
    "P",
    "S",
    "regime",
    "exact",
    "main_term",
    "abs_error",
    "envelope",
    "normalized_error",
    "D",
    "elapsed_ms",
];

/// Render a real with 12 significant digits, `%.12g` style.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mant), sign, exp.abs())
    } else {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `start, start·ratio, …` with `count` entries, rounded to integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub start: u64,
    pub ratio: f64,
    pub count: u32,
}

impl Ladder {
    pub fn single(value: u64) -> Self {
        Self {
            start: value,
            ratio: 2.0,
            count: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 || self.start == 0 || !(self.ratio > 1.0 && self.ratio.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ladder needs start >= 1, ratio > 1 and count >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<u64> {
        let mut out: Vec<u64> = (0..self.count as i32)
            .map(|k| (self.start as f64 * self.ratio.powi(k)).round() as u64)
            .collect();
        out.dedup();
        out
    }
}

impl FromStr for Ladder {
    type Err = Error;

    /// `N` for a single value or `start:ratio:count`.
    fn from_str(s: &str) -> Result<Self> {
        let bad =
            || Error::InvalidArgument(format!("bad ladder {s:?}; want N or start:ratio:count"));
        let parts: Vec<&str> = s.split(':').collect();
        let ladder = match parts.as_slice() {
            [v] => Ladder::single(v.trim().parse().map_err(|_| bad())?),
            [start, ratio, count] => Ladder {
                start: start.trim().parse().map_err(|_| bad())?,
                ratio: ratio.trim().parse().map_err(|_| bad())?,
                count: count.trim().parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        ladder.validate()?;
        Ok(ladder)
    }
}

/// Parse a modulus list: `3,5,101`, an inclusive range `2..50`, or a ladder `start:ratio:count`.
pub fn parse_q_values(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidArgument(format!("bad q list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else if part.contains(':') {
            out.extend(part.parse::<Ladder>()?.values());
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum APolicy {
    AllReduced,
    Fixed(u64),
    Sample { n: usize, seed: u64 },
}

impl APolicy {
    /// Residues for modulus `q`, ascending.
    pub fn residues(&self, q: u64) -> Result<Vec<u64>> {
        match *self {
            APolicy::AllReduced => Ok(build_modulus_context(q)?.iter_reduced().collect()),
            APolicy::Fixed(a) => {
                if a == 0 || a > q || gcd(a, q) != 1 {
                    Err(Error::InvalidResidue { a, q })
                } else {
                    Ok(vec![a])
                }
            }
            APolicy::Sample { n, seed } => sample_residues(q, n, seed),
        }
    }

    fn count_for(&self, q: u64) -> Result<u64> {
        Ok(match *self {
            APolicy::AllReduced => build_modulus_context(q)?.phi(),
            APolicy::Fixed(_) => 1,
            APolicy::Sample { n, .. } => (n as u64).min(build_modulus_context(q)?.phi()),
        })
    }
}

/// `n` distinct reduced residues mod `q` drawn by a ChaCha8 stream keyed on `(seed, q)`,
/// returned ascending. All of them when `φ(q) <= n`.
pub fn sample_residues(q: u64, n: usize, seed: u64) -> Result<Vec<u64>> {
    let ctx = build_modulus_context(q)?;
    if ctx.phi() <= n as u64 {
        return Ok(ctx.iter_reduced().collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(q);
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < n {
        let a = rng.random_range(1..=q);
        if ctx.is_coprime(a) {
            picked.insert(a);
        }
    }
    Ok(picked.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub q_values: Vec<u64>,
    pub p_ladder: Ladder,
    pub s_ladder: Ladder,
    pub a_policy: APolicy,
    pub cfg: RegimeConfig,
    pub max_instances: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.q_values.is_empty() || self.q_values.contains(&0) {
            return Err(Error::InvalidArgument(
                "q list must be nonempty and positive".into(),
            ));
        }
        self.p_ladder.validate()?;
        self.s_ladder.validate()?;
        self.cfg.validate()
    }

    /// Number of rows the sweep would produce.
    pub fn estimate_instances(&self) -> Result<u64> {
        let grid = self.p_ladder.values().len() as u64 * self.s_ladder.values().len() as u64;
        let mut total = 0u64;
        for &q in &self.q_values {
            total = total.saturating_add(self.a_policy.count_for(q)?.saturating_mul(grid));
        }
        Ok(total)
    }

    fn sorted_q(&self) -> Vec<u64> {
        let mut q = self.q_values.clone();
        q.sort_unstable();
        q.dedup();
        q
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub a: u64,
    pub q: u64,
    pub p_bound: u64,
    pub s_bound: u64,
    pub regime: Regime,
    pub exact: u64,
    pub main_term: f64,
    pub abs_error: f64,
    pub envelope: f64,
    pub normalized_error: f64,
    pub d: f64,
    pub elapsed_ms: f64,
}

impl SweepRow {
    pub fn from_report(report: &CountReport, elapsed_ms: f64) -> Self {
        let i = report.instance;
        Self {
            a: i.a(),
            q: i.q(),
            p_bound: i.p_bound(),
            s_bound: i.s_bound(),
            regime: report.regime,
            exact: report.exact,
            main_term: report.main_term,
            abs_error: report.abs_error,
            envelope: report.envelope,
            normalized_error: report.normalized_error,
            d: report.d,
            elapsed_ms,
        }
    }

    pub fn to_record(&self) -> [String; 12] {
        [
            self.a.to_string(),
            self.q.to_string(),
            self.p_bound.to_string(),
            self.s_bound.to_string(),
            self.regime.to_string(),
            self.exact.to_string(),
            fmt_real(self.main_term),
            fmt_real(self.abs_error),
            fmt_real(self.envelope),
            fmt_real(self.normalized_error),
            fmt_real(self.d),
            fmt_real(self.elapsed_ms),
        ]
    }

    pub fn from_record(record: &csv::StringRecord) -> Result<Self> {
        if record.len() != CSV_HEADER.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} fields, got {}",
                CSV_HEADER.len(),
                record.len()
            )));
        }
        fn int(s: &str) -> Result<u64> {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad integer {s:?}")))
        }
        fn real(s: &str) -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad real {s:?}")))
        }
        Ok(Self {
            a: int(&record[0])?,
            q: int(&record[1])?,
            p_bound: int(&record[2])?,
            s_bound: int(&record[3])?,
            regime: record[4].parse()?,
            exact: int(&record[5])?,
            main_term: real(&record[6])?,
            abs_error: real(&record[7])?,
            envelope: real(&record[8])?,
            normalized_error: real(&record[9])?,
            d: real(&record[10])?,
            elapsed_ms: real(&record[11])?,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rec = self.to_record();
        let mut map = serde_json::Map::new();
        for (i, (name, text)) in CSV_HEADER.iter().zip(rec.iter()).enumerate() {
            let v = match i {
                4 => serde_json::Value::String(text.clone()),
                0..=3 | 5 => serde_json::Value::from(text.parse::<u64>().expect("integer field")),
                _ => serde_json::Number::from_f64(text.parse::<f64>().unwrap_or(f64::NAN))
                    .map_or(serde_json::Value::Null, serde_json::Value::Number),
            };
            map.insert((*name).to_string(), v);
        }
        serde_json::Value::Object(map)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.to_record()).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("io: {e}")))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::InvalidArgument(format!(
            "unexpected header {header:?}"
        )));
    }
    r.records()
        .map(|rec| SweepRow::from_record(&rec.map_err(csv_err)?))
        .collect()
}

pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    let arr = serde_json::Value::Array(rows.iter().map(SweepRow::to_json).collect());
    serde_json::to_writer_pretty(&mut out, &arr)
        .map_err(|e| Error::InvalidArgument(format!("json: {e}")))?;
    writeln!(out).map_err(|e| Error::InvalidArgument(format!("io: {e}")))
}

pub fn write_rows<W: Write>(rows: &[SweepRow], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

/// Run a sweep. Rows come back ordered by `(q, P, S, a)`; `threads = None` uses the
/// global pool.
pub fn run_sweep(spec: &SweepSpec, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let estimate = spec.estimate_instances()?;
    if estimate > spec.max_instances {
        return Err(Error::Capacity {
            what: "sweep instances",
            requested: estimate,
            allowed: spec.max_instances,
        });
    }
    let p_values = spec.p_ladder.values();
    let s_values = spec.s_ladder.values();
    let limit = p_values.iter().chain(&s_values).copied().max().unwrap_or(1);
    let tables = build_sieve(limit)?;
    let run = || run_sweep_with(&tables, spec, &p_values, &s_values);
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn run_sweep_with(
    tables: &SieveTables,
    spec: &SweepSpec,
    p_values: &[u64],
    s_values: &[u64],
) -> Result<Vec<SweepRow>> {
    let mut cells = Vec::new();
    for q in spec.sorted_q() {
        for &p in p_values {
            for &s in s_values {
                cells.push((q, p, s));
            }
        }
    }
    let chunks: Vec<Vec<SweepRow>> = cells
        .par_iter()
        .map(|&(q, p, s)| -> Result<Vec<SweepRow>> {
            let ctx = build_modulus_context(q)?;
            let counter = ResidueCounter::new(tables, &ctx, p, s)?;
            spec.a_policy
                .residues(q)?
                .into_iter()
                .map(|a| {
                    let start = Instant::now();
                    let inst = ProblemInstance::new(a, q, p, s)?;
                    let report = CountReport::from_counter(&counter, &inst, &spec.cfg)?;
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    Ok(SweepRow::from_report(&report, ms))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}
