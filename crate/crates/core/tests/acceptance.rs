//! One test per acceptance criterion. Each prints a single `[PASS]`/`[FAIL]` line
//! and then asserts, so `cargo test --test acceptance -- --nocapture` gives the table.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prisq_core::arith::{build_modulus_context, build_sieve, gcd, SieveTables};
use prisq_core::asymptotics::{predicted_n_q, predicted_s_q, RegimeConfig};
use prisq_core::counting::{
    count_exact, count_n_q, count_via_mobius, pi_q, s_q, sum_over_residues, ProblemInstance,
};
use prisq_core::exp_sums::{
    interval_count_error, inverse_residue_discrepancy, kloosterman_prime_sum, parseval_check,
};
use prisq_core::selftest::{check_squarefree_identity, squarefree_by_trial_division};
use prisq_core::sweep::{sample_residues, write_csv, SweepRow};
use prisq_core::{CountReport, ResidueCounter};

const SAMPLE_SEED: u64 = 42;

fn big_tables() -> &'static SieveTables {
    static T: OnceLock<SieveTables> = OnceLock::new();
    T.get_or_init(|| build_sieve(1_000_000).unwrap())
}

fn verdict(id: u32, title: &str, pass: bool, took: Duration, limit: Duration, detail: &str) {
    let in_time = took <= limit;
    let ok = pass && in_time;
    println!(
        "[{}] AC{id} {title}: {detail} ({:.2?} of {:.0?}{})",
        if ok { "PASS" } else { "FAIL" },
        took,
        limit,
        if in_time { "" } else { ", too slow" }
    );
    assert!(ok, "AC{id} failed: {detail}");
}

#[test]
fn ac1_squarefree_identity() {
    let t0 = Instant::now();
    let tables = build_sieve(100_000).unwrap();
    let outcome = check_squarefree_identity(tables.mobius_table());
    // Also hold the stored bitset to the same indicator.
    let bad =
        (1..=100_000u64).find(|&n| tables.is_squarefree(n) != squarefree_by_trial_division(n));
    let pass = outcome.passed() && bad.is_none();
    let detail = match (&outcome.failure, bad) {
        (Some(f), _) => f.clone(),
        (None, Some(n)) => format!("bitset disagrees at n={n}"),
        (None, None) => format!("n <= 100000, {} cases", outcome.cases),
    };
    verdict(
        1,
        "square-free identity",
        pass,
        t0.elapsed(),
        Duration::from_secs(1),
        &detail,
    );
}

#[test]
fn ac2_mobius_decomposition() {
    let t0 = Instant::now();
    let tables = build_sieve(5_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut cases = Vec::new();
    while cases.len() < 200 {
        let q = rng.random_range(1..=500u64);
        let a = rng.random_range(1..=q);
        if gcd(a, q) != 1 {
            continue;
        }
        cases.push((
            a,
            q,
            rng.random_range(2..=5_000u64),
            rng.random_range(1..=5_000u64),
        ));
    }
    cases.extend([
        (1, 7, 5_000, 1),
        (3, 10, 4_000, 1),
        (1, 1, 5_000, 5_000),
        (1, 1, 2, 1),
    ]);
    cases.extend([
        (96, 97, 5_000, 5_000),
        (499, 500, 5_000, 5_000),
        (1, 2, 3_000, 4_000),
    ]);
    let mut mismatch = None;
    for &(a, q, p, s) in &cases {
        let inst = ProblemInstance::new(a, q, p, s).unwrap();
        let via = count_via_mobius(&tables, &inst, None).unwrap().value;
        let exact = count_exact(&tables, &inst).unwrap() as i64;
        if via != exact {
            mismatch = Some(format!(
                "(a,q,P,S)=({a},{q},{p},{s}): mobius={via} exact={exact}"
            ));
            break;
        }
    }
    let detail = mismatch
        .clone()
        .unwrap_or_else(|| format!("{} instances agree", cases.len()));
    verdict(
        2,
        "Mobius decomposition",
        mismatch.is_none(),
        t0.elapsed(),
        Duration::from_secs(30),
        &detail,
    );
}

#[test]
fn ac3_partition() {
    let t0 = Instant::now();
    let tables = build_sieve(10_000).unwrap();
    let mut bad = None;
    for q in 1..=60u64 {
        let ctx = build_modulus_context(q).unwrap();
        let total = sum_over_residues(&tables, q, 10_000, 10_000).unwrap();
        let want = pi_q(&tables, 10_000, &ctx).unwrap() * s_q(&tables, 10_000, &ctx).unwrap();
        if total != want {
            bad = Some(format!("q={q}: sum={total} pi*s={want}"));
            break;
        }
    }
    let detail = bad.clone().unwrap_or_else(|| "q <= 60 at P=S=10^4".into());
    verdict(
        3,
        "partition over residues",
        bad.is_none(),
        t0.elapsed(),
        Duration::from_secs(60),
        &detail,
    );
}

#[test]
fn ac4_n_q_remainder() {
    let t0 = Instant::now();
    let tables = build_sieve(10_000).unwrap();
    let mut worst: f64 = 0.0;
    let mut bad = None;
    'outer: for q in 1..=1000u64 {
        let ctx = build_modulus_context(q).unwrap();
        for p in [1_000u64, 10_000] {
            let pi = pi_q(&tables, p, &ctx).unwrap() as f64;
            for s in [1_000u64, 10_000] {
                let exact = count_n_q(&tables, p, s, &ctx).unwrap() as f64;
                let pred = predicted_n_q(&tables, &ctx, p, s).unwrap();
                let allowed = pi * ctx.tau() as f64;
                let gap = (exact - pred).abs();
                if allowed > 0.0 {
                    worst = worst.max(gap / allowed);
                }
                if gap > allowed {
                    bad = Some(format!("q={q} P={p} S={s}: |diff|={gap} > {allowed}"));
                    break 'outer;
                }
            }
        }
    }
    let detail = bad
        .clone()
        .unwrap_or_else(|| format!("max |diff|/(pi*tau) = {worst:.4}"));
    verdict(
        4,
        "N_q remainder",
        bad.is_none(),
        t0.elapsed(),
        Duration::from_secs(60),
        &detail,
    );
}

#[test]
fn ac5_squarefree_density_shape() {
    let t0 = Instant::now();
    let tables = big_tables();
    let ladder = [1_000u64, 10_000, 100_000, 1_000_000];
    let mut bad = Vec::new();
    let mut cells = Vec::new();
    for q in [1u64, 2, 3, 4, 6, 12, 101, 1000] {
        let ctx = build_modulus_context(q).unwrap();
        let ratios: Vec<f64> = ladder
            .iter()
            .map(|&s| {
                (s_q(tables, s, &ctx).unwrap() as f64 - predicted_s_q(&ctx, s)).abs()
                    / (s as f64).sqrt()
            })
            .collect();
        let cap = 4.0 * ctx.tau() as f64;
        let growing = ratios.windows(2).all(|w| w[1] > w[0]);
        if ratios.iter().any(|&r| r > cap) || growing {
            bad.push(format!("q={q} ratios={ratios:?} cap={cap}"));
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        cells.push(format!("q={q}:{max:.3}"));
    }
    let pass = bad.is_empty();
    let detail = if pass {
        format!("max ratio per q [{}]", cells.join(" "))
    } else {
        bad.join("; ")
    };
    verdict(
        5,
        "square-free density shape",
        pass,
        t0.elapsed(),
        Duration::from_secs(60),
        &detail,
    );
}

#[test]
fn ac6_kloosterman_bound_and_symmetry() {
    let t0 = Instant::now();
    let tables = build_sieve(10_000).unwrap();
    let cfg = RegimeConfig::default();
    let mut bad = None;
    let mut sums = 0;
    'outer: for q in 1..=50u64 {
        let ctx = build_modulus_context(q).unwrap();
        for a in ctx.iter_reduced() {
            let k = kloosterman_prime_sum(&tables, a, &ctx, 10_000, &cfg).unwrap();
            let mirror = if a == q { q } else { q - a };
            let m = kloosterman_prime_sum(&tables, mirror, &ctx, 10_000, &cfg).unwrap();
            let scale = (k.trivial_bound as f64).max(1.0);
            sums += 1;
            if k.modulus_abs > k.trivial_bound as f64 * (1.0 + 1e-9) {
                bad = Some(format!(
                    "q={q} a={a}: |S|={} > {}",
                    k.modulus_abs, k.trivial_bound
                ));
                break 'outer;
            }
            if (m.value - k.value.conj()).norm() > 1e-9 * scale {
                bad = Some(format!("q={q} a={a}: S(q-a) != conj S(a)"));
                break 'outer;
            }
        }
    }
    let detail = bad
        .clone()
        .unwrap_or_else(|| format!("{sums} sums at x=10^4"));
    verdict(
        6,
        "Kloosterman bound and symmetry",
        bad.is_none(),
        t0.elapsed(),
        Duration::from_secs(30),
        &detail,
    );
}

#[test]
fn ac7_parseval() {
    let t0 = Instant::now();
    let tables = build_sieve(10_000).unwrap();
    let mut worst: f64 = 0.0;
    let mut bad = None;
    for q in 1..=100u64 {
        let ctx = build_modulus_context(q).unwrap();
        let check = parseval_check(&tables, &ctx, 10_000).unwrap();
        worst = worst.max(check.relative_gap());
        if !check.holds(1e-6) {
            bad = Some(format!("q={q}: lhs={} rhs={}", check.lhs, check.rhs));
            break;
        }
    }
    let detail = bad
        .clone()
        .unwrap_or_else(|| format!("max relative gap {worst:.2e}"));
    verdict(
        7,
        "Parseval identity",
        bad.is_none(),
        t0.elapsed(),
        Duration::from_secs(60),
        &detail,
    );
}

#[test]
fn ac8_desk_scale_trend() {
    let t0 = Instant::now();
    let tables = big_tables();
    let cfg = RegimeConfig {
        a_exponent: 2.0,
        epsilon: 0.01,
        o1_factor: 1.0,
        ..RegimeConfig::default()
    };
    let ladder = [10_000u64, 100_000, 1_000_000];
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    let mut summary = Vec::new();
    for q in [101u64, 10_007] {
        let ctx = build_modulus_context(q).unwrap();
        let residues = sample_residues(q, 20, SAMPLE_SEED).unwrap();
        let mut maxima = Vec::new();
        for &x in &ladder {
            let counter = ResidueCounter::new(tables, &ctx, x, x).unwrap();
            let mut max: f64 = 0.0;
            for &a in &residues {
                let started = Instant::now();
                let inst = ProblemInstance::new(a, q, x, x).unwrap();
                let report = CountReport::from_counter(&counter, &inst, &cfg).unwrap();
                max = max.max(report.normalized_error);
                rows.push(SweepRow::from_report(
                    &report,
                    started.elapsed().as_secs_f64() * 1e3,
                ));
            }
            maxima.push(max);
        }
        for (i, w) in maxima.windows(2).enumerate() {
            if w[1] > 2.0 * w[0] {
                bad.push(format!(
                    "q={q} P=S {}->{}: {:.4e} -> {:.4e}",
                    ladder[i],
                    ladder[i + 1],
                    w[0],
                    w[1]
                ));
            }
        }
        let shown: Vec<String> = maxima.iter().map(|m| format!("{m:.3e}")).collect();
        summary.push(format!("q={q}: {}", shown.join(" -> ")));
    }
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_trend.csv");
    write_csv(&rows, std::fs::File::create(&path).unwrap()).unwrap();
    let mut table = Vec::new();
    write_csv(&rows, &mut table).unwrap();
    println!("{}", String::from_utf8(table).unwrap());
    let pass = bad.is_empty();
    let detail = if pass {
        format!("{} (table at {})", summary.join("; "), path.display())
    } else {
        format!(
            "{} | growth over 2x: {}",
            summary.join("; "),
            bad.join("; ")
        )
    };
    verdict(
        8,
        "desk-scale trend",
        pass,
        t0.elapsed(),
        Duration::from_secs(600),
        &detail,
    );
}

#[test]
fn ac9_interval_mechanism() {
    let t0 = Instant::now();
    let tables = big_tables();
    let x = 100_000u64;
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for q in [101u64, 1009] {
        let ctx = build_modulus_context(q).unwrap();
        let pi = pi_q(tables, x, &ctx).unwrap() as f64;
        for a in sample_residues(q, 20, SAMPLE_SEED).unwrap() {
            let err = interval_count_error(tables, a, &ctx, x, x).unwrap();
            let disc = inverse_residue_discrepancy(tables, a, &ctx, x)
                .unwrap()
                .value;
            let allowed = disc * pi + 1.0;
            worst = worst.max(err / allowed);
            if err > allowed {
                bad.push(format!("q={q} a={a}: {err:.1} > {allowed:.1}"));
            }
        }
    }
    let pass = bad.is_empty();
    let detail = if pass {
        format!("max err/(D*pi+1) = {worst:.4}")
    } else {
        format!(
            "{} of 40 exceed D*pi+1, max ratio {worst:.1}; first {}",
            bad.len(),
            bad[0]
        )
    };
    verdict(
        9,
        "interval-count mechanism",
        pass,
        t0.elapsed(),
        Duration::from_secs(60),
        &detail,
    );
}
