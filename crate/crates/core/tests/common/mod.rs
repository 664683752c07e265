//! Slow, obviously-correct oracles. Nothing here calls into `prisq_core`.
#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factor(n).iter().all(|&(_, e)| e == 1)
}

pub fn mobius(n: u64) -> i8 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

pub fn phi(q: u64) -> u64 {
    (1..=q).filter(|&a| gcd(a, q) == 1).count() as u64
}

pub fn tau(q: u64) -> u64 {
    (1..=q).filter(|&d| q.is_multiple_of(d)).count() as u64
}

/// Inverse by exhaustive search.
pub fn inverse(x: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    (1..q).find(|&y| x * y % q == 1).expect("unit")
}

pub fn pi_q(p_bound: u64, q: u64) -> u64 {
    (2..=p_bound)
        .filter(|&p| is_prime(p) && gcd(p, q) == 1)
        .count() as u64
}

pub fn s_q(s_bound: u64, q: u64) -> u64 {
    (1..=s_bound)
        .filter(|&s| is_squarefree(s) && gcd(s, q) == 1)
        .count() as u64
}

pub fn coprime_upto(n: u64, q: u64) -> u64 {
    (1..=n).filter(|&s| gcd(s, q) == 1).count() as u64
}

/// Double loop over all `(p, s)` pairs.
pub fn count_pairs(a: u64, q: u64, p_bound: u64, s_bound: u64, squarefree_only: bool) -> u64 {
    let mut n = 0;
    for p in (2..=p_bound).filter(|&p| is_prime(p)) {
        for s in 1..=s_bound {
            if gcd(p * s, q) == 1 && (p * s) % q == a % q && (!squarefree_only || is_squarefree(s))
            {
                n += 1;
            }
        }
    }
    n
}

/// Σ_p exp(2πi a p̄ / q) evaluated straight from the definition.
pub fn kloosterman(a: u64, q: u64, x: u64) -> Complex64 {
    (2..=x)
        .filter(|&p| is_prime(p) && gcd(p, q) == 1)
        .map(|p| Complex64::from_polar(1.0, TAU * ((a * inverse(p, q)) % q) as f64 / q as f64))
        .sum()
}

/// sup_t |#{u < t}/N − t| over t in [0, 1], probing every jump from both sides.
pub fn star_discrepancy(points: &[f64]) -> f64 {
    let n = points.len() as f64;
    let mut best: f64 = 0.0;
    let mut probes: Vec<f64> = points.to_vec();
    probes.push(1.0);
    for &t in &probes {
        // #{u < t} at t, and #{u <= t} as t is approached from above.
        let left = points.iter().filter(|&&u| u < t).count() as f64;
        best = best.max((left / n - t).abs());
        let right = points.iter().filter(|&&u| u <= t).count() as f64;
        best = best.max((right / n - t).abs());
    }
    best
}
