//! Invariant suite run by `prisq selftest`, at fixed small scales.
//!
//! Every check is deterministic. Checks that validate the sieve take the raw
//! tables as slices so a corrupted copy can be fed in.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{
    build_modulus_context, build_sieve, gcd, mod_inverse, segmented_primes, SieveTables,
};
use crate::asymptotics::RegimeConfig;
use crate::counting::{
    count_exact, count_n_q, count_via_mobius, pi_q, s_q, sum_over_residues, ProblemInstance,
};
use crate::error::Result;
use crate::exp_sums::{kloosterman_prime_sum, parseval_check};

pub const SIEVE_SCALE: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: u64,
    /// First failing case, with full inputs.
    pub failure: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "PASS {} (cases={})", self.name, self.cases),
            Some(msg) => write!(f, "FAIL {} (cases={}): {}", self.name, self.cases, msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfTestReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }
}

impl fmt::Display for SelfTestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "{} checks, {} passed, {} failed",
            self.checks.len(),
            self.checks.len() - self.failures(),
            self.failures()
        )
    }
}

struct Check {
    name: &'static str,
    cases: u64,
    failure: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failure: None,
        }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name,
            cases: self.cases,
            failure: self.failure,
        }
    }
}

/// Square-free test by trial-division factorization, independent of any sieve.
pub fn squarefree_by_trial_division(mut n: u64) -> bool {
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

pub fn is_prime_by_trial_division(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

/// `Σ_{d² | n} μ(d)` against the factorization-based square-free indicator, for every
/// `1 <= n < mobius.len()`. `mobius[0]` is ignored.
pub fn check_squarefree_identity(mobius: &[i8]) -> CheckOutcome {
    let n_max = mobius.len().saturating_sub(1);
    let mut sums = vec![0i32; n_max + 1];
    let mut d = 1;
    while d * d <= n_max {
        let m = mobius[d] as i32;
        if m != 0 {
            for k in (d * d..=n_max).step_by(d * d) {
                sums[k] += m;
            }
        }
        d += 1;
    }
    let mut c = Check::new("squarefree_mobius_factorization");
    for n in 1..=n_max {
        let want = squarefree_by_trial_division(n as u64) as i32;
        c.case(sums[n] == want, || {
            format!(
                "n={n}: sum_(d^2|n) mu(d) = {} but indicator = {want}",
                sums[n]
            )
        });
    }
    c.finish()
}

/// `Σ_{d | n} μ(d) = [n = 1]` for every `1 <= n < mobius.len()`.
pub fn check_divisor_sum_identity(mobius: &[i8]) -> CheckOutcome {
    let n_max = mobius.len().saturating_sub(1);
    let mut sums = vec![0i32; n_max + 1];
    for d in 1..=n_max {
        let m = mobius[d] as i32;
        if m != 0 {
            for k in (d..=n_max).step_by(d) {
                sums[k] += m;
            }
        }
    }
    let mut c = Check::new("mobius_divisor_sum");
    for n in 1..=n_max {
        let want = (n == 1) as i32;
        c.case(sums[n] == want, || {
            format!("n={n}: sum_(d|n) mu(d) = {}", sums[n])
        });
    }
    c.finish()
}

/// Sieve primes against trial division and the segmented sieve.
pub fn check_prime_lists(tables: &SieveTables) -> CheckOutcome {
    let mut c = Check::new("prime_lists");
    let limit = tables.limit();
    let seg = segmented_primes(2, limit.max(2)).unwrap_or_default();
    let sieve: Vec<u64> = tables.primes().iter().map(|&p| p as u64).collect();
    c.case(seg == sieve, || {
        format!("segmented_primes(2, {limit}) differs from sieve primes")
    });
    for &p in &sieve {
        c.case(is_prime_by_trial_division(p), || {
            format!("{p} listed but composite")
        });
    }
    c.case(
        sieve.len()
            == (2..=limit)
                .filter(|&n| is_prime_by_trial_division(n))
                .count(),
        || format!("prime count up to {limit} disagrees with trial division"),
    );
    c.finish()
}

pub fn check_mod_inverse(max_q: u64) -> CheckOutcome {
    let mut c = Check::new("mod_inverse");
    for q in 1..=max_q {
        for x in 0..q {
            match mod_inverse(x as i64, q) {
                Ok(y) => c.case(gcd(x, q) == 1 && (x * y) % q == 1 % q, || {
                    format!("mod_inverse({x}, {q}) = {y}")
                }),
                Err(_) => c.case(gcd(x, q) != 1, || format!("mod_inverse({x}, {q}) failed")),
            }
        }
    }
    c.finish()
}

/// Double loop over primes `p <= P` and `s <= S` using only trial division.
pub fn brute_force_count(a: u64, q: u64, p_bound: u64, s_bound: u64, squarefree_only: bool) -> u64 {
    let mut n = 0;
    for p in 2..=p_bound {
        if !is_prime_by_trial_division(p) {
            continue;
        }
        for s in 1..=s_bound {
            if gcd(p * s, q) != 1 || (squarefree_only && !squarefree_by_trial_division(s)) {
                continue;
            }
            if (p * s) % q == a % q {
                n += 1;
            }
        }
    }
    n
}

pub fn check_count_oracle(tables: &SieveTables) -> Result<CheckOutcome> {
    let mut c = Check::new("count_exact_vs_double_loop");
    for &(a, q, p, s) in &[
        (1, 3, 10, 10),
        (1, 1, 10, 10),
        (1, 2, 2, 1),
        (5, 12, 150, 120),
        (3, 97, 300, 200),
        (10, 11, 60, 400),
    ] {
        let inst = ProblemInstance::new(a, q, p, s)?;
        let fast = count_exact(tables, &inst)?;
        let slow = brute_force_count(a, q, p, s, true);
        c.case(fast == slow, || {
            format!("{inst:?}: fast={fast} brute={slow}")
        });
    }
    Ok(c.finish())
}

pub fn check_mobius_decomposition(
    tables: &SieveTables,
    instances: usize,
    seed: u64,
) -> Result<CheckOutcome> {
    let mut c = Check::new("mobius_decomposition_identity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..instances {
        let q = rng.random_range(1..=100u64);
        let a = loop {
            let a = rng.random_range(1..=q);
            if gcd(a, q) == 1 {
                break a;
            }
        };
        let p = rng.random_range(2..=2000u64);
        let s = rng.random_range(1..=2000u64);
        let inst = ProblemInstance::new(a, q, p, s)?;
        let direct = count_exact(tables, &inst)? as i64;
        let via = count_via_mobius(tables, &inst, None)?.value;
        c.case(direct == via, || {
            format!("{inst:?}: exact={direct} mobius={via}")
        });
    }
    Ok(c.finish())
}

pub fn check_partition(tables: &SieveTables, max_q: u64, bound: u64) -> Result<CheckOutcome> {
    let mut c = Check::new("residue_partition");
    for q in 1..=max_q {
        let ctx = build_modulus_context(q)?;
        let total = sum_over_residues(tables, q, bound, bound)?;
        let want = pi_q(tables, bound, &ctx)? * s_q(tables, bound, &ctx)?;
        c.case(total == want, || {
            format!("q={q} P=S={bound}: sum={total} pi*s={want}")
        });
    }
    Ok(c.finish())
}

pub fn check_n_q_remainder(tables: &SieveTables, max_q: u64, bound: u64) -> Result<CheckOutcome> {
    let mut c = Check::new("n_q_remainder");
    for q in 1..=max_q {
        let ctx = build_modulus_context(q)?;
        let pi = pi_q(tables, bound, &ctx)?;
        let exact = count_n_q(tables, bound, bound, &ctx)? as i128;
        let scaled = ctx.phi() as i128 * pi as i128 * bound as i128;
        // |exact − φπS/q| <= πτ, cleared of the denominator.
        let gap = (exact * q as i128 - scaled).abs();
        let allowed = pi as i128 * ctx.tau() as i128 * q as i128;
        c.case(gap <= allowed, || {
            format!("q={q} P=S={bound}: gap*q={gap} > pi*tau*q={allowed}")
        });
    }
    Ok(c.finish())
}

pub fn check_kloosterman(tables: &SieveTables, max_q: u64, x: u64) -> Result<CheckOutcome> {
    let mut c = Check::new("kloosterman_bound_and_symmetry");
    let cfg = RegimeConfig::default();
    for q in 1..=max_q {
        let ctx = build_modulus_context(q)?;
        for a in ctx.iter_reduced() {
            let k = kloosterman_prime_sum(tables, a, &ctx, x, &cfg)?;
            let tb = k.trivial_bound as f64;
            c.case(k.modulus_abs <= tb * (1.0 + 1e-9), || {
                format!("q={q} a={a} x={x}: |S|={} > pi_q={tb}", k.modulus_abs)
            });
            if a < q {
                let m = kloosterman_prime_sum(tables, q - a, &ctx, x, &cfg)?;
                let gap = (m.value - k.value.conj()).norm();
                c.case(gap <= 1e-9 * tb.max(1.0), || {
                    format!("q={q} a={a} x={x}: S(q-a) - conj S(a) = {gap}")
                });
            }
        }
    }
    Ok(c.finish())
}

pub fn check_parseval(tables: &SieveTables, max_q: u64, x: u64) -> Result<CheckOutcome> {
    let mut c = Check::new("parseval");
    for q in 1..=max_q {
        let ctx = build_modulus_context(q)?;
        let p = parseval_check(tables, &ctx, x)?;
        c.case(p.holds(1e-6), || {
            format!("q={q} x={x}: lhs={} rhs={}", p.lhs, p.rhs)
        });
    }
    Ok(c.finish())
}

/// Run every check on freshly built tables.
pub fn run_selftest() -> Result<SelfTestReport> {
    let tables = build_sieve(SIEVE_SCALE)?;
    run_selftest_on(&tables)
}

/// Run every check against the given tables (which must cover [`SIEVE_SCALE`]).
pub fn run_selftest_on(tables: &SieveTables) -> Result<SelfTestReport> {
    tables.ensure_covers(SIEVE_SCALE)?;
    let mobius = &tables.mobius_table()[..=SIEVE_SCALE as usize];
    let checks = vec![
        check_squarefree_identity(mobius),
        check_divisor_sum_identity(mobius),
        check_prime_lists(tables),
        check_mod_inverse(200),
        check_count_oracle(tables)?,
        check_mobius_decomposition(tables, 100, 0x5eed)?,
        check_partition(tables, 30, 2_000)?,
        check_n_q_remainder(tables, 300, 1_000)?,
        check_kloosterman(tables, 30, 2_000)?,
        check_parseval(tables, 50, 2_000)?,
    ];
    Ok(SelfTestReport { checks })
}
