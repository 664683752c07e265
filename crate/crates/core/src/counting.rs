//! Exact counts of primes, square-free integers and prime × square-free pairs
//! in reduced residue classes.
//!
//! All counts are exact integers. The fast paths bucket square-free `s` by
//! residue once and then visit each prime through its inverse modulo `q`.

use serde::{Deserialize, Serialize};

use crate::arith::{build_modulus_context, gcd, mod_inverse, ModulusContext, SieveTables};
use crate::error::{Error, Result};

/// One counting problem `(a, q, P, S)` with `gcd(a, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    a: u64,
    q: u64,
    #[serde(rename = "P")]
    p_bound: u64,
    #[serde(rename = "S")]
    s_bound: u64,
}

impl ProblemInstance {
    pub fn new(a: u64, q: u64, p_bound: u64, s_bound: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("q must be positive".into()));
        }
        if a == 0 || a > q || gcd(a, q) != 1 {
            return Err(Error::InvalidResidue { a, q });
        }
        if p_bound < 2 {
            return Err(Error::InvalidArgument(format!(
                "P must be >= 2, got {p_bound}"
            )));
        }
        if s_bound < 1 {
            return Err(Error::InvalidArgument("S must be >= 1".into()));
        }
        Ok(Self {
            a,
            q,
            p_bound,
            s_bound,
        })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p_bound(&self) -> u64 {
        self.p_bound
    }

    pub fn s_bound(&self) -> u64 {
        self.s_bound
    }
}

/// Number of `1 <= s <= n` with `s ≡ t (mod q)`, for `0 <= t < q`.
#[inline]
fn class_count(t: u64, n: u64, q: u64) -> u64 {
    if t == 0 {
        n / q
    } else if t > n {
        0
    } else {
        (n - t) / q + 1
    }
}

/// Precomputed inverse residues of the primes `p <= P` coprime to `q`, together with
/// the residue histogram of square-free `s <= S` coprime to `q`. Reused across many `a`.
#[derive(Debug, Clone)]
pub struct ResidueCounter<'a> {
    tables: &'a SieveTables,
    q: u64,
    p_bound: u64,
    s_bound: u64,
    inverses: Vec<u64>,
    buckets: Option<Vec<u64>>,
    s_q: u64,
}

impl<'a> ResidueCounter<'a> {
    pub fn new(
        tables: &'a SieveTables,
        ctx: &ModulusContext,
        p_bound: u64,
        s_bound: u64,
    ) -> Result<Self> {
        tables.ensure_covers(p_bound.max(s_bound))?;
        let q = ctx.q();
        let inverses = tables
            .primes_up_to(p_bound)
            .iter()
            .map(|&p| p as u64)
            .filter(|&p| ctx.is_coprime(p))
            .map(|p| mod_inverse(p as i64, q))
            .collect::<Result<Vec<_>>>()?;

        let (buckets, s_q) = if q <= s_bound {
            let mut unit = vec![true; q as usize];
            for p in ctx.prime_divisors() {
                for m in (0..q).step_by(p as usize) {
                    unit[m as usize] = false;
                }
            }
            if q == 1 {
                unit[0] = true;
            }
            let mut buckets = vec![0u64; q as usize];
            let mut total = 0;
            for s in 1..=s_bound {
                let r = (s % q) as usize;
                if unit[r] && tables.is_squarefree(s) {
                    buckets[r] += 1;
                    total += 1;
                }
            }
            (Some(buckets), total)
        } else {
            let total = (1..=s_bound)
                .filter(|&s| tables.is_squarefree(s) && ctx.is_coprime(s))
                .count() as u64;
            (None, total)
        };

        Ok(Self {
            tables,
            q,
            p_bound,
            s_bound,
            inverses,
            buckets,
            s_q,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p_bound(&self) -> u64 {
        self.p_bound
    }

    pub fn s_bound(&self) -> u64 {
        self.s_bound
    }

    /// π_q(P).
    pub fn pi_q(&self) -> u64 {
        self.inverses.len() as u64
    }

    /// s_q(S).
    pub fn s_q(&self) -> u64 {
        self.s_q
    }

    /// Inverses `p̄ mod q` of the primes counted by [`Self::pi_q`], in increasing `p`.
    pub fn inverses(&self) -> &[u64] {
        &self.inverses
    }

    #[inline]
    fn squarefree_in_class(&self, t: u64) -> u64 {
        match &self.buckets {
            Some(b) => b[t as usize],
            // q > S: the class holds at most t itself, already a unit mod q.
            None => (t >= 1 && t <= self.s_bound && self.tables.is_squarefree(t)) as u64,
        }
    }

    /// N^#_{a,q}(P,S). `a` is reduced modulo `q`; coprimality is the caller's concern.
    pub fn count_exact(&self, a: u64) -> u64 {
        let a = a % self.q;
        self.inverses
            .iter()
            .map(|&inv| self.squarefree_in_class(a * inv % self.q))
            .sum()
    }

    /// N_{a,q}(P, n) for any `n <= S`: the square-free restriction dropped.
    pub fn count_pairs_all(&self, a: u64, n: u64) -> u64 {
        let a = a % self.q;
        self.inverses
            .iter()
            .map(|&inv| class_count(a * inv % self.q, n, self.q))
            .sum()
    }

    /// Σ_{d <= cap, (d,q)=1} μ(d) N_{a d̄², q}(P, ⌊S/d²⌋).
    pub fn mobius_sum(&self, a: u64, d_cap: Option<u64>) -> Result<MobiusSum> {
        let root = self.s_bound.isqrt();
        let truncation = d_cap.map_or(root, |c| c.min(root));
        let mut value = 0i64;
        let mut terms = 0u64;
        for d in 1..=truncation {
            let mu = self.tables.mobius(d);
            if mu == 0 || gcd(d, self.q) != 1 {
                continue;
            }
            let dinv = mod_inverse(d as i64, self.q)?;
            let shifted = a % self.q * (dinv * dinv % self.q) % self.q;
            let n = self.count_pairs_all(shifted, self.s_bound / (d * d));
            value += mu as i64 * n as i64;
            terms += 1;
        }
        Ok(MobiusSum {
            value,
            truncation,
            full_range: truncation == root,
            terms,
        })
    }
}

/// Result of [`count_via_mobius`]. With the full `d`-range `value` equals
/// [`count_exact`]; with a cap it is the truncated head of the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MobiusSum {
    pub value: i64,
    /// Largest `d` admitted.
    pub truncation: u64,
    pub full_range: bool,
    /// Number of nonzero `μ(d)` terms with `(d, q) = 1`.
    pub terms: u64,
}

/// Number of primes `p <= P` with `gcd(p, q) = 1`.
pub fn pi_q(tables: &SieveTables, p_bound: u64, ctx: &ModulusContext) -> Result<u64> {
    tables.ensure_covers(p_bound)?;
    let all = tables.primes_up_to(p_bound).len() as u64;
    let shared = ctx
        .prime_divisors()
        .into_iter()
        .filter(|&p| p <= p_bound)
        .count() as u64;
    Ok(all - shared)
}

/// Number of square-free `s <= S` with `gcd(s, q) = 1`.
pub fn s_q(tables: &SieveTables, s_bound: u64, ctx: &ModulusContext) -> Result<u64> {
    tables.ensure_covers(s_bound)?;
    if ctx.q() == 1 {
        return Ok(tables.squarefree_count(s_bound));
    }
    Ok((1..=s_bound)
        .filter(|&s| tables.is_squarefree(s) && ctx.is_coprime(s))
        .count() as u64)
}

pub fn count_exact(tables: &SieveTables, inst: &ProblemInstance) -> Result<u64> {
    let ctx = build_modulus_context(inst.q)?;
    let counter = ResidueCounter::new(tables, &ctx, inst.p_bound, inst.s_bound)?;
    Ok(counter.count_exact(inst.a))
}

pub fn count_pairs_all(tables: &SieveTables, inst: &ProblemInstance) -> Result<u64> {
    let ctx = build_modulus_context(inst.q)?;
    tables.ensure_covers(inst.p_bound)?;
    // The square-free histogram is not needed here; S = 0 keeps construction O(π(P)).
    let counter = ResidueCounter::new(tables, &ctx, inst.p_bound, 0)?;
    Ok(counter.count_pairs_all(inst.a, inst.s_bound))
}

/// N_q(P,S) = π_q(P) · #{s <= S : (s,q) = 1}.
pub fn count_n_q(
    tables: &SieveTables,
    p_bound: u64,
    s_bound: u64,
    ctx: &ModulusContext,
) -> Result<u64> {
    Ok(pi_q(tables, p_bound, ctx)? * ctx.coprime_count(s_bound))
}

/// The count N^#_{a,q}(P,S) recomputed through μ²(s) = Σ_{d²|s} μ(d).
pub fn count_via_mobius(
    tables: &SieveTables,
    inst: &ProblemInstance,
    d_cap: Option<u64>,
) -> Result<MobiusSum> {
    if d_cap == Some(0) {
        return Err(Error::InvalidArgument("D cap must be positive".into()));
    }
    let ctx = build_modulus_context(inst.q)?;
    tables.ensure_covers(inst.s_bound.max(inst.p_bound))?;
    let counter = ResidueCounter::new(tables, &ctx, inst.p_bound, 0)?;
    let counter = ResidueCounter {
        s_bound: inst.s_bound,
        ..counter
    };
    counter.mobius_sum(inst.a, d_cap)
}

/// Σ over reduced `a` of N^#_{a,q}(P,S). Equals π_q(P)·s_q(S).
pub fn sum_over_residues(tables: &SieveTables, q: u64, p_bound: u64, s_bound: u64) -> Result<u64> {
    let ctx = build_modulus_context(q)?;
    let counter = ResidueCounter::new(tables, &ctx, p_bound, s_bound)?;
    Ok(ctx.iter_reduced().map(|a| counter.count_exact(a)).sum())
}

/// N_{a,q}(P,S) / (PS/q + 1), the quantity an upper bound of the form
/// `(PS/q + 1)·(PS)^{o(1)}` controls.
pub fn pairs_bound_ratio(tables: &SieveTables, inst: &ProblemInstance) -> Result<f64> {
    let n = count_pairs_all(tables, inst)? as f64;
    let scale = inst.p_bound as f64 * inst.s_bound as f64 / inst.q as f64 + 1.0;
    Ok(n / scale)
}

/// Largest [`pairs_bound_ratio`] over a set of instances, with the maximizing instance.
pub fn max_pairs_bound_ratio(
    tables: &SieveTables,
    instances: &[ProblemInstance],
) -> Result<Option<(ProblemInstance, f64)>> {
    let mut best: Option<(ProblemInstance, f64)> = None;
    for inst in instances {
        let r = pairs_bound_ratio(tables, inst)?;
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((*inst, r));
        }
    }
    Ok(best)
}
