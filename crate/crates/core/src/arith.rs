//! Sieving and elementary modular arithmetic shared by the counting,
//! asymptotic and exponential-sum modules.

use crate::error::{Error, Result};

/// Default memory budget for a single [`SieveTables`] build (2 GiB).
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Hard ceiling on the sieve limit regardless of budget.
pub const MAX_SIEVE_LIMIT: u64 = 1 << 31;

/// Largest span `hi - lo` accepted by [`segmented_primes`].
pub const MAX_SEGMENT_SPAN: u64 = 1 << 32;

/// Largest supported modulus. Residue products `a * b` with `a, b < q` must fit in `u64`.
pub const MAX_MODULUS: u64 = u32::MAX as u64;

const SEGMENT_LEN: u64 = 1 << 18;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `x` modulo `q`, in `[1, q)`. For `q = 1` every integer is a unit and the
/// unique residue is 0, which is returned.
pub fn mod_inverse(x: i64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if q == 1 {
        return Ok(0);
    }
    let xr = (x as i128).rem_euclid(q as i128) as u64;
    // Extended Euclid on (xr, q) with signed 128-bit coefficients.
    let (mut r0, mut r1) = (q as i128, xr as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if r0 != 1 {
        return Err(Error::NoInverse { x: xr, q });
    }
    Ok(t0.rem_euclid(q as i128) as u64)
}

/// Fixed-size bit array.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }
}

/// Immutable Möbius, smallest-prime-factor, square-free and prime tables for `1..=limit`.
#[derive(Debug, Clone)]
pub struct SieveTables {
    limit: u64,
    mobius: Vec<i8>,
    spf: Vec<u32>,
    squarefree: BitSet,
    squarefree_prefix: Vec<u32>,
    primes: Vec<u32>,
}

/// Rough upper estimate of the bytes [`SieveTables`] needs for `limit`.
pub fn sieve_bytes(limit: u64) -> u64 {
    let n = limit + 1;
    // mobius (1) + spf (4) + square-free prefix samples (4/64) + bits (1/8) + primes.
    let prime_estimate = if limit < 100 {
        limit
    } else {
        (1.3 * limit as f64 / (limit as f64).ln()) as u64
    };
    n * 5 + n / 16 + n / 8 + 4 * prime_estimate
}

pub fn build_sieve(limit: u64) -> Result<SieveTables> {
    build_sieve_with_budget(limit, DEFAULT_MEMORY_BUDGET)
}

/// Linear sieve producing μ, the smallest prime factor and the prime list in one pass.
pub fn build_sieve_with_budget(limit: u64, budget_bytes: u64) -> Result<SieveTables> {
    if limit == 0 || limit > MAX_SIEVE_LIMIT {
        return Err(Error::Capacity {
            what: "sieve limit",
            requested: limit,
            allowed: MAX_SIEVE_LIMIT,
        });
    }
    let need = sieve_bytes(limit);
    if need > budget_bytes {
        return Err(Error::Capacity {
            what: "sieve memory (bytes)",
            requested: need,
            allowed: budget_bytes,
        });
    }

    let n = limit as usize;
    let mut mobius = vec![0i8; n + 1];
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    mobius[1] = 1;
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            mobius[i] = -1;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let ip = i as u64 * p as u64;
            if p > si || ip > limit {
                break;
            }
            let ip = ip as usize;
            spf[ip] = p;
            mobius[ip] = if p == si { 0 } else { -mobius[i] };
        }
    }

    let mut squarefree = BitSet::new(n + 1);
    let mut squarefree_prefix = Vec::with_capacity(n / 64 + 1);
    let mut running = 0u32;
    for (i, &m) in mobius.iter().enumerate() {
        if i % 64 == 0 {
            squarefree_prefix.push(running);
        }
        if m != 0 {
            squarefree.set(i);
            running += 1;
        }
    }

    Ok(SieveTables {
        limit,
        mobius,
        spf,
        squarefree,
        squarefree_prefix,
        primes,
    })
}

impl SieveTables {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// μ(n) for `1 <= n <= limit`.
    #[inline]
    pub fn mobius(&self, n: u64) -> i8 {
        self.mobius[n as usize]
    }

    /// The whole Möbius table, index 0 unused (holds 0).
    pub fn mobius_table(&self) -> &[i8] {
        &self.mobius
    }

    /// Smallest prime factor of `n` for `2 <= n <= limit`.
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    #[inline]
    pub fn is_squarefree(&self, n: u64) -> bool {
        n >= 1 && self.squarefree.get(n as usize)
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `<= bound` (bound clamped to the limit).
    pub fn primes_up_to(&self, bound: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| (p as u64) <= bound);
        &self.primes[..end]
    }

    /// Number of square-free integers in `1..=n`.
    pub fn squarefree_count(&self, n: u64) -> u64 {
        let n = n.min(self.limit) as usize;
        let block = n / 64;
        let mut count = self.squarefree_prefix[block] as u64;
        for i in block * 64..=n {
            count += self.squarefree.get(i) as u64;
        }
        count
    }

    /// Distinct prime factors of `n` with multiplicity, via the spf table.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    pub(crate) fn ensure_covers(&self, needed: u64) -> Result<()> {
        if needed > self.limit {
            return Err(Error::TableTooSmall {
                needed,
                limit: self.limit,
            });
        }
        Ok(())
    }
}

fn small_primes(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in `[lo, hi]` by a segmented sieve of Eratosthenes. Working memory is one
/// fixed-size segment plus the base primes up to `sqrt(hi)`.
pub fn segmented_primes(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo < 2 || lo > hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if hi - lo > MAX_SEGMENT_SPAN {
        return Err(Error::Capacity {
            what: "segment span",
            requested: hi - lo,
            allowed: MAX_SEGMENT_SPAN,
        });
    }
    let root = hi.isqrt();
    if sieve_bytes(root) > DEFAULT_MEMORY_BUDGET {
        return Err(Error::Capacity {
            what: "base prime table (bytes)",
            requested: sieve_bytes(root),
            allowed: DEFAULT_MEMORY_BUDGET,
        });
    }
    let base = small_primes(root);
    let mut out = Vec::new();
    let mut marks = vec![false; SEGMENT_LEN as usize];
    let mut start = lo;
    loop {
        let end = start.saturating_add(SEGMENT_LEN - 1).min(hi);
        let len = (end - start + 1) as usize;
        marks[..len].fill(false);
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (p * p).max(start.div_ceil(p) * p);
            let mut m = first;
            while m <= end {
                marks[(m - start) as usize] = true;
                m += p;
            }
        }
        out.extend(
            marks[..len]
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| start + i as u64),
        );
        if end == hi {
            break;
        }
        start = end + 1;
    }
    Ok(out)
}

/// Arithmetic data attached to a modulus `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusContext {
    q: u64,
    phi: u64,
    tau: u64,
    factorization: Vec<(u64, u32)>,
    reduced_residues: Option<Vec<u64>>,
}

/// Factor `q` by trial division and derive φ(q), τ(q).
pub fn build_modulus_context(q: u64) -> Result<ModulusContext> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if q > MAX_MODULUS {
        return Err(Error::Capacity {
            what: "modulus",
            requested: q,
            allowed: MAX_MODULUS,
        });
    }
    let mut factorization = Vec::new();
    let mut n = q;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            factorization.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factorization.push((n, 1));
    }
    let phi = factorization
        .iter()
        .fold(q, |acc, &(p, _)| acc / p * (p - 1));
    let tau = factorization.iter().map(|&(_, e)| e as u64 + 1).product();
    Ok(ModulusContext {
        q,
        phi,
        tau,
        factorization,
        reduced_residues: None,
    })
}

impl ModulusContext {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn factorization(&self) -> &[(u64, u32)] {
        &self.factorization
    }

    pub fn prime_divisors(&self) -> Vec<u64> {
        self.factorization.iter().map(|&(p, _)| p).collect()
    }

    pub fn is_coprime(&self, n: u64) -> bool {
        self.factorization.iter().all(|&(p, _)| !n.is_multiple_of(p))
    }

    /// `(r, μ(r))` for every square-free divisor `r` of `q`.
    pub fn squarefree_divisors(&self) -> Vec<(u64, i8)> {
        let mut out = vec![(1u64, 1i8)];
        for &(p, _) in &self.factorization {
            let extra: Vec<_> = out.iter().map(|&(r, m)| (r * p, -m)).collect();
            out.extend(extra);
        }
        out
    }

    /// `#{1 <= s <= n : gcd(s, q) = 1}` by inclusion-exclusion over square-free divisors.
    pub fn coprime_count(&self, n: u64) -> u64 {
        let signed: i64 = self
            .squarefree_divisors()
            .iter()
            .map(|&(r, m)| m as i64 * (n / r) as i64)
            .sum();
        signed as u64
    }

    /// Materialize the reduced residues `1 <= a <= q`.
    pub fn with_reduced_residues(mut self) -> Self {
        let res: Vec<u64> = (1..=self.q).filter(|&a| gcd(a, self.q) == 1).collect();
        self.reduced_residues = Some(res);
        self
    }

    pub fn reduced_residues(&self) -> Option<&[u64]> {
        self.reduced_residues.as_deref()
    }

    /// Iterator over reduced residues whether or not they were materialized.
    pub fn iter_reduced(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.q).filter(move |&a| self.is_coprime(a))
    }
}
