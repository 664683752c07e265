mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use prisq_core::arith::build_sieve;
use prisq_core::asymptotics::{error_envelope, regime_thresholds, RegimeConfig};
use prisq_core::exp_sums::kloosterman_prime_sum;
use prisq_core::selftest::run_selftest;
use prisq_core::sweep::{
    fmt_real, parse_q_values, run_sweep, write_rows, APolicy, Format, Ladder, SweepRow, SweepSpec,
    DEFAULT_MAX_INSTANCES,
};
use prisq_core::{build_modulus_context, build_report, Error, ProblemInstance};

#[derive(Parser)]
#[command(
    name = "prisq",
    version,
    about = "Primes times square-free numbers in residue classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact count, main term and error envelope for one (a, q, P, S).
    Count(Opts),
    /// Grid of counts over q, a P ladder, an S ladder and a residue policy.
    Sweep(Opts),
    /// Regime boundaries and envelope values across a q ladder.
    Regimes(Opts),
    /// Kloosterman sum over primes S_q(a; x) against its bounds.
    Kloosterman(Opts),
    /// Run the invariant suite.
    Selftest(Opts),
}

#[derive(Args, Default)]
struct Opts {
    #[arg(long)]
    a: Option<u64>,
    /// Modulus; sweep and regimes accept lists `3,5`, ranges `2..50` and ladders `2:2:10`.
    #[arg(long)]
    q: Option<String>,
    /// Prime bound; sweep accepts a ladder `start:ratio:count`.
    #[arg(long = "P")]
    p: Option<String>,
    /// Square-free bound; sweep accepts a ladder. Defaults to P.
    #[arg(long = "S")]
    s: Option<String>,
    /// Length of the Kloosterman sum; defaults to P.
    #[arg(long)]
    x: Option<u64>,
    #[arg(long = "A")]
    a_exponent: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    o1: Option<f64>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample this many reduced residues per modulus (needs --seed).
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    max_instances: Option<u64>,
    /// key=value file supplying any of the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Core(Error),
    Selftest,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_err(e: io::Error) -> Failure {
    usage(format!("io: {e}"))
}

impl Opts {
    fn merge_config(&mut self) -> CliResult<()> {
        let Some(path) = self.config.clone() else {
            return Ok(());
        };
        for (key, value) in config::read(&path).map_err(usage)? {
            self.fill(&key, &value)?;
        }
        Ok(())
    }

    fn fill(&mut self, key: &str, value: &str) -> CliResult<()> {
        fn set<T: FromStr>(slot: &mut Option<T>, key: &str, value: &str) -> CliResult<()> {
            if slot.is_none() {
                *slot = Some(
                    value
                        .parse()
                        .map_err(|_| usage(format!("config: bad value {value:?} for {key}")))?,
                );
            }
            Ok(())
        }
        match key {
            "a" => set(&mut self.a, key, value),
            "q" => set(&mut self.q, key, value),
            "P" => set(&mut self.p, key, value),
            "S" => set(&mut self.s, key, value),
            "x" => set(&mut self.x, key, value),
            "A" => set(&mut self.a_exponent, key, value),
            "epsilon" => set(&mut self.epsilon, key, value),
            "o1" => set(&mut self.o1, key, value),
            "format" => set(&mut self.format, key, value),
            "out" => set(&mut self.out, key, value),
            "seed" => set(&mut self.seed, key, value),
            "sample" => set(&mut self.sample, key, value),
            "threads" => set(&mut self.threads, key, value),
            "max-instances" => set(&mut self.max_instances, key, value),
            other => Err(usage(format!("config: unknown key {other:?}"))),
        }
    }

    fn cfg(&self) -> CliResult<RegimeConfig> {
        let d = RegimeConfig::default();
        let cfg = RegimeConfig {
            a_exponent: self.a_exponent.unwrap_or(d.a_exponent),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            o1_factor: self.o1.unwrap_or(d.o1_factor),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn format(&self) -> CliResult<Option<Format>> {
        self.format
            .as_deref()
            .map(Format::from_str)
            .transpose()
            .map_err(Failure::Core)
    }

    fn single(field: &Option<String>, name: &str) -> CliResult<u64> {
        let raw = field
            .as_deref()
            .ok_or_else(|| usage(format!("--{name} is required")))?;
        raw.trim()
            .parse()
            .map_err(|_| usage(format!("--{name} must be a single integer, got {raw:?}")))
    }

    fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(io_err)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn cmd_count(o: &Opts) -> CliResult<()> {
    let a = o.a.ok_or_else(|| usage("--a is required"))?;
    let q = Opts::single(&o.q, "q")?;
    let p = Opts::single(&o.p, "P")?;
    let s = match o.s {
        Some(_) => Opts::single(&o.s, "S")?,
        None => p,
    };
    let cfg = o.cfg()?;
    let inst = ProblemInstance::new(a, q, p, s)?;
    let started = Instant::now();
    let tables = build_sieve(p.max(s))?;
    let report = build_report(&tables, &inst, &cfg)?;
    let row = SweepRow::from_report(&report, started.elapsed().as_secs_f64() * 1e3);
    if report.beyond_poly_range {
        eprintln!(
            "warning: q = {q} is far outside q <= P^O(1); the envelope is not meaningful here"
        );
    }
    let mut w = o.writer()?;
    match o.format()? {
        Some(f @ Format::Csv) => write_rows(&[row], f, &mut w)?,
        Some(Format::Json) => {
            serde_json::to_writer_pretty(&mut w, &row.to_json())
                .map_err(|e| usage(e.to_string()))?;
            writeln!(w).map_err(io_err)?;
        }
        None => {
            let lines = [
                format!("a={a} q={q} P={p} S={s}"),
                format!("exact={}", report.exact),
                format!("main_term={}", fmt_real(report.main_term)),
                format!("abs_error={}", fmt_real(report.abs_error)),
                format!("envelope={}", fmt_real(report.envelope)),
                format!("normalized_error={}", fmt_real(report.normalized_error)),
                format!("regime={}", report.regime),
                format!("D={}", fmt_real(report.d)),
            ];
            for line in lines {
                writeln!(w, "{line}").map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

fn cmd_sweep(o: &Opts) -> CliResult<()> {
    let q_values = parse_q_values(o.q.as_deref().ok_or_else(|| usage("--q is required"))?)?;
    let p_ladder: Ladder =
        o.p.as_deref()
            .ok_or_else(|| usage("--P is required"))?
            .parse()?;
    let s_ladder = match &o.s {
        Some(s) => s.parse()?,
        None => p_ladder,
    };
    let a_policy = match (o.a, o.sample) {
        (Some(_), Some(_)) => return Err(usage("--a and --sample are mutually exclusive")),
        (Some(a), None) => APolicy::Fixed(a),
        (None, Some(n)) => {
            let seed = o.seed.ok_or_else(|| usage("--sample needs --seed"))?;
            if n == 0 {
                return Err(usage("--sample must be positive"));
            }
            APolicy::Sample { n, seed }
        }
        (None, None) => APolicy::AllReduced,
    };
    let spec = SweepSpec {
        q_values,
        p_ladder,
        s_ladder,
        a_policy,
        cfg: o.cfg()?,
        max_instances: o.max_instances.unwrap_or(DEFAULT_MAX_INSTANCES),
    };
    let rows = run_sweep(&spec, o.threads)?;
    let mut w = o.writer()?;
    write_rows(&rows, o.format()?.unwrap_or(Format::Csv), &mut w)?;
    w.flush().map_err(io_err)
}

fn cmd_regimes(o: &Opts) -> CliResult<()> {
    let p = Opts::single(&o.p, "P")?;
    let s = match o.s {
        Some(_) => Opts::single(&o.s, "S")?,
        None => p,
    };
    let cfg = o.cfg()?;
    let q_values = match &o.q {
        Some(list) => parse_q_values(list)?,
        None => std::iter::successors(Some(2u64), |&q| q.checked_mul(2))
            .take_while(|&q| q <= p)
            .collect(),
    };
    let (low, high) = regime_thresholds(p, &cfg);
    let mut rows = Vec::new();
    for q in q_values {
        let env = error_envelope(q, p, s, &cfg)?;
        rows.push((q, env));
    }
    let b_text = |b: Option<f64>| b.map_or_else(|| "n/a".to_string(), fmt_real);
    let mut w = o.writer()?;
    match o.format()? {
        Some(Format::Json) => {
            let body = json!({
                "P": p,
                "S": s,
                "A": cfg.a_exponent,
                "log_threshold": low,
                "power_threshold": high,
                "rows": rows.iter().map(|(q, e)| json!({
                    "q": q,
                    "regime": e.regime.to_string(),
                    "E": e.e,
                    "B": e.b,
                    "D": e.d,
                })).collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(&mut w, &body).map_err(|e| usage(e.to_string()))?;
            writeln!(w).map_err(io_err)?;
        }
        format => {
            if format.is_none() {
                writeln!(w, "P={p} S={s} A={}", fmt_real(cfg.a_exponent)).map_err(io_err)?;
                writeln!(w, "(log P)^A={}", fmt_real(low)).map_err(io_err)?;
                writeln!(w, "P^(3/4)={}", fmt_real(high)).map_err(io_err)?;
                if low >= high {
                    writeln!(w, "MediumQ band is empty").map_err(io_err)?;
                }
            }
            writeln!(w, "q,regime,E,B,D").map_err(io_err)?;
            for (q, e) in &rows {
                writeln!(
                    w,
                    "{q},{},{},{},{}",
                    e.regime,
                    fmt_real(e.e),
                    b_text(e.b),
                    fmt_real(e.d)
                )
                .map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

fn cmd_kloosterman(o: &Opts) -> CliResult<()> {
    let a = o.a.ok_or_else(|| usage("--a is required"))?;
    let q = Opts::single(&o.q, "q")?;
    let x = match (o.x, &o.p) {
        (Some(x), _) => x,
        (None, Some(_)) => Opts::single(&o.p, "P")?,
        (None, None) => return Err(usage("--x (or --P) is required")),
    };
    if a == 0 || a > q {
        return Err(Error::InvalidResidue { a, q }.into());
    }
    let cfg = o.cfg()?;
    let ctx = build_modulus_context(q)?;
    let tables = build_sieve(x)?;
    let k = kloosterman_prime_sum(&tables, a, &ctx, x, &cfg)?;
    let bound_ratio = k.ratio_to_bound();
    let mut w = o.writer()?;
    match o.format()? {
        Some(Format::Json) => {
            let body = json!({
                "a": a, "q": q, "x": x,
                "re": k.value.re, "im": k.value.im, "abs": k.modulus_abs,
                "trivial_bound": k.trivial_bound,
                "regime_bound": k.regime_bound,
                "ratio_trivial": k.ratio_to_trivial(),
                "ratio_bound": bound_ratio,
            });
            serde_json::to_writer_pretty(&mut w, &body).map_err(|e| usage(e.to_string()))?;
            writeln!(w).map_err(io_err)?;
        }
        Some(Format::Csv) => {
            writeln!(
                w,
                "a,q,x,re,im,abs,trivial_bound,regime_bound,ratio_trivial,ratio_bound"
            )
            .map_err(io_err)?;
            let na = |v: Option<f64>| v.map_or_else(|| "n/a".into(), fmt_real);
            writeln!(
                w,
                "{a},{q},{x},{},{},{},{},{},{},{}",
                fmt_real(k.value.re),
                fmt_real(k.value.im),
                fmt_real(k.modulus_abs),
                k.trivial_bound,
                na(k.regime_bound),
                fmt_real(k.ratio_to_trivial()),
                na(bound_ratio)
            )
            .map_err(io_err)?;
        }
        None => {
            let na = |v: Option<f64>| v.map_or_else(|| "n/a".into(), fmt_real);
            let lines = [
                format!("a={a} q={q} x={x}"),
                format!("re={}", fmt_real(k.value.re)),
                format!("im={}", fmt_real(k.value.im)),
                format!("abs={}", fmt_real(k.modulus_abs)),
                format!("trivial_bound={}", k.trivial_bound),
                format!("regime_bound={}", na(k.regime_bound)),
                format!("ratio_trivial={}", fmt_real(k.ratio_to_trivial())),
                format!("ratio_bound={}", na(bound_ratio)),
            ];
            for line in lines {
                writeln!(w, "{line}").map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

fn cmd_selftest(o: &Opts) -> CliResult<()> {
    let report = run_selftest()?;
    let mut w = o.writer()?;
    writeln!(w, "{report}").map_err(io_err)?;
    w.flush().map_err(io_err)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Selftest)
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Count(mut o) => o.merge_config().and_then(|_| cmd_count(&o)),
        Command::Sweep(mut o) => o.merge_config().and_then(|_| cmd_sweep(&o)),
        Command::Regimes(mut o) => o.merge_config().and_then(|_| cmd_regimes(&o)),
        Command::Kloosterman(mut o) => o.merge_config().and_then(|_| cmd_kloosterman(&o)),
        Command::Selftest(mut o) => o.merge_config().and_then(|_| cmd_selftest(&o)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Selftest) => {
            eprintln!("error: selftest failed");
            ExitCode::from(2)
        }
        Err(Failure::Core(e @ Error::Capacity { .. })) => {
            eprintln!("refused: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
