//! Kloosterman sums over primes `S_q(a; x) = Σ_{p <= x, (p,q)=1} e_q(a p̄)`,
//! an orthogonality check for them, and the star discrepancy of the
//! inverse-residue sequence `a p̄ mod q`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{gcd, ModulusContext, SieveTables};
use crate::asymptotics::{bound_b, RegimeConfig};
use crate::counting::{count_n_q, ResidueCounter};
use crate::error::{Error, Result};

/// Sums with more terms than this are accumulated with Neumaier compensation.
pub const COMPENSATED_THRESHOLD: usize = 1_000_000;

/// `e(r/q)` for an integer residue `0 <= r < q`. Residues above `q/2` use the
/// negative angle so that `e((q-r)/q)` is the exact conjugate of `e(r/q)`.
#[inline]
pub fn unit_phase(r: u64, q: u64) -> Complex64 {
    if r == 0 {
        Complex64::new(1.0, 0.0)
    } else if 2 * r == q {
        Complex64::new(-1.0, 0.0)
    } else if 2 * r < q {
        let (s, c) = (TAU * r as f64 / q as f64).sin_cos();
        Complex64::new(c, s)
    } else {
        let (s, c) = (TAU * (q - r) as f64 / q as f64).sin_cos();
        Complex64::new(c, -s)
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn sum_phases(residues: impl Iterator<Item = u64>, q: u64, len: usize) -> Complex64 {
    if len > COMPENSATED_THRESHOLD {
        let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
        for r in residues {
            let z = unit_phase(r, q);
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.value(), im.value())
    } else {
        residues.map(|r| unit_phase(r, q)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KloostermanValue {
    pub a: u64,
    pub q: u64,
    pub x: u64,
    pub value: Complex64,
    pub modulus_abs: f64,
    /// π_q(x), the number of unit-modulus terms.
    pub trivial_bound: u64,
    /// `B_q(x)`; undefined for `q = 1`.
    pub regime_bound: Option<f64>,
}

impl KloostermanValue {
    pub fn ratio_to_trivial(&self) -> f64 {
        self.modulus_abs / self.trivial_bound as f64
    }

    pub fn ratio_to_bound(&self) -> Option<f64> {
        self.regime_bound.map(|b| self.modulus_abs / b)
    }
}

fn check_residue(a: u64, q: u64) -> Result<()> {
    if gcd(a % q, q) != 1 {
        return Err(Error::InvalidResidue { a, q });
    }
    Ok(())
}

/// Exact `S_q(a; x)`, each phase taken from the integer residue `a p̄ mod q`.
pub fn kloosterman_prime_sum(
    tables: &SieveTables,
    a: u64,
    ctx: &ModulusContext,
    x: u64,
    cfg: &RegimeConfig,
) -> Result<KloostermanValue> {
    let q = ctx.q();
    check_residue(a, q)?;
    if x < 2 {
        return Err(Error::InvalidArgument(format!("x must be >= 2, got {x}")));
    }
    let counter = ResidueCounter::new(tables, ctx, x, 0)?;
    let ar = a % q;
    let inv = counter.inverses();
    let value = sum_phases(inv.iter().map(|&i| ar * i % q), q, inv.len());
    Ok(KloostermanValue {
        a,
        q,
        x,
        value,
        modulus_abs: value.norm(),
        trivial_bound: counter.pi_q(),
        regime_bound: if q >= 2 {
            Some(bound_b(q, x, cfg)?)
        } else {
            None
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl ParsevalCheck {
    pub fn relative_gap(&self) -> f64 {
        if self.rhs == 0.0 {
            self.lhs.abs()
        } else {
            (self.lhs - self.rhs).abs() / self.rhs
        }
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.relative_gap() <= rel_tol
    }
}

/// `Σ_{a mod q} |Σ_p e_q(a p̄)|²` against `q·#{(p₁,p₂) : p̄₁ ≡ p̄₂}`, over every residue `a`.
pub fn parseval_check(tables: &SieveTables, ctx: &ModulusContext, x: u64) -> Result<ParsevalCheck> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!("x must be >= 2, got {x}")));
    }
    let q = ctx.q();
    let counter = ResidueCounter::new(tables, ctx, x, 0)?;
    let mut hist = vec![0u64; q as usize];
    for &i in counter.inverses() {
        hist[i as usize] += 1;
    }
    let occupied: Vec<(u64, f64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, &h)| h > 0)
        .map(|(r, &h)| (r as u64, h as f64))
        .collect();
    let lhs: f64 = (0..q)
        .into_par_iter()
        .map(|a| {
            let inner: Complex64 = occupied
                .iter()
                .map(|&(r, h)| unit_phase(a * r % q, q) * h)
                .sum();
            inner.norm_sqr()
        })
        .sum();
    let pairs: u64 = hist.iter().map(|&h| h * h).sum();
    Ok(ParsevalCheck {
        lhs,
        rhs: (q * pairs) as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub value: f64,
    pub points: u64,
    /// Set when `q = 1`: all points collapse to 0.
    pub degenerate: bool,
}

/// Star discrepancy of a sorted sample in `[0, 1)`.
pub fn star_discrepancy_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let hi = (i + 1) as f64 / n - u;
            let lo = u - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Star discrepancy of `{a p̄ mod q / q : p <= P, (p,q)=1}`.
pub fn inverse_residue_discrepancy(
    tables: &SieveTables,
    a: u64,
    ctx: &ModulusContext,
    p_bound: u64,
) -> Result<Discrepancy> {
    let q = ctx.q();
    check_residue(a, q)?;
    if p_bound < 2 {
        return Err(Error::InvalidArgument(format!(
            "P must be >= 2, got {p_bound}"
        )));
    }
    let counter = ResidueCounter::new(tables, ctx, p_bound, 0)?;
    if counter.pi_q() == 0 {
        return Err(Error::EmptySequence { q, p_bound });
    }
    let ar = a % q;
    let mut residues: Vec<u64> = counter.inverses().iter().map(|&i| ar * i % q).collect();
    residues.sort_unstable();
    let points: Vec<f64> = residues.iter().map(|&r| r as f64 / q as f64).collect();
    Ok(Discrepancy {
        value: star_discrepancy_sorted(&points),
        points: points.len() as u64,
        degenerate: q == 1,
    })
}

/// `|N_{a,q}(P,S) − N_q(P,S)/q|`.
pub fn interval_count_error(
    tables: &SieveTables,
    a: u64,
    ctx: &ModulusContext,
    p_bound: u64,
    s_bound: u64,
) -> Result<f64> {
    let (pairs, n_q) = pairs_and_n_q(tables, a, ctx, p_bound, s_bound)?;
    Ok((pairs as f64 - n_q as f64 / ctx.q() as f64).abs())
}

/// `|N_{a,q}(P,S) − π_q(P)·S/q|`. Writing `S = mq + r`, this is the deviation of
/// `#{p : 1 <= a p̄ mod q <= r}` from `π_q(P)·r/q`, so it never exceeds `D*·π_q(P)`
/// for the star discrepancy `D*` of [`inverse_residue_discrepancy`].
pub fn uniform_count_error(
    tables: &SieveTables,
    a: u64,
    ctx: &ModulusContext,
    p_bound: u64,
    s_bound: u64,
) -> Result<f64> {
    check_residue(a, ctx.q())?;
    let counter = ResidueCounter::new(tables, ctx, p_bound, 0)?;
    let pairs = counter.count_pairs_all(a, s_bound) as f64;
    Ok((pairs - counter.pi_q() as f64 * s_bound as f64 / ctx.q() as f64).abs())
}

fn pairs_and_n_q(
    tables: &SieveTables,
    a: u64,
    ctx: &ModulusContext,
    p_bound: u64,
    s_bound: u64,
) -> Result<(u64, u64)> {
    check_residue(a, ctx.q())?;
    let counter = ResidueCounter::new(tables, ctx, p_bound, 0)?;
    let pairs = counter.count_pairs_all(a, s_bound);
    Ok((pairs, count_n_q(tables, p_bound, s_bound, ctx)?))
}
