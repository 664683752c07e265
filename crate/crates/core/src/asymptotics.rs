//! Main-term predictions, regime-dependent error envelopes, the truncation
//! parameter `D`, and the sufficient conditions for positivity.
//!
//! Every `x^{o(1)}`, `(PS)^{o(1)}` and `q^{o(1)}` factor is modelled by the single
//! multiplier [`RegimeConfig::o1_factor`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{build_modulus_context, ModulusContext, SieveTables};
use crate::counting::{pi_q, s_q, ProblemInstance, ResidueCounter};
use crate::error::{Error, Result};

/// Moduli above `P^POLY_RANGE_EXPONENT` are flagged in reports as outside `q <= P^{O(1)}`.
pub const POLY_RANGE_EXPONENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    /// Exponent `A` in the small-modulus threshold `(log P)^A`.
    pub a_exponent: f64,
    pub epsilon: f64,
    pub o1_factor: f64,
    /// Constant `c` replacing `≫` by `>= c ·` in the positivity conditions.
    pub positivity_constant: f64,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self {
            a_exponent: 2.0,
            epsilon: 0.01,
            o1_factor: 1.0,
            positivity_constant: 1.0,
        }
    }
}

impl RegimeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.a_exponent)
            && ok(self.epsilon)
            && ok(self.o1_factor)
            && ok(self.positivity_constant)
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "A, epsilon, o1 and positivity constant must be positive and finite: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    SmallQ,
    MediumQ,
    LargeQ,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SmallQ => "SmallQ",
            Regime::MediumQ => "MediumQ",
            Regime::LargeQ => "LargeQ",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SmallQ" => Ok(Regime::SmallQ),
            "MediumQ" => Ok(Regime::MediumQ),
            "LargeQ" => Ok(Regime::LargeQ),
            other => Err(Error::InvalidArgument(format!("unknown regime {other:?}"))),
        }
    }
}

/// `((log x)^A, x^{3/4})`, natural logarithm.
pub fn regime_thresholds(x: u64, cfg: &RegimeConfig) -> (f64, f64) {
    let x = x as f64;
    (x.ln().powf(cfg.a_exponent), x.powf(0.75))
}

fn regime_of(q: u64, x: u64, cfg: &RegimeConfig) -> Regime {
    let (small, large) = regime_thresholds(x, cfg);
    let qf = q as f64;
    if qf <= small {
        Regime::SmallQ
    } else if qf < large {
        Regime::MediumQ
    } else {
        Regime::LargeQ
    }
}

/// Which of the three modulus ranges `q` falls in relative to `P`.
/// Ties go to the closed side: `q = (log P)^A` is small, `q = P^{3/4}` is large.
pub fn classify_regime(q: u64, p_bound: u64, cfg: &RegimeConfig) -> Result<Regime> {
    cfg.validate()?;
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    if q == 1 {
        // The trivial modulus: no congruence, every envelope reduces to the P/q branch.
        return Ok(Regime::SmallQ);
    }
    if p_bound <= 2 {
        return Err(Error::DegenerateRange { q, p_bound });
    }
    Ok(regime_of(q, p_bound, cfg))
}

/// The envelope `E(q, P)` multiplying `S^{1/2}` in the error term.
pub fn envelope_e(q: u64, p_bound: u64, cfg: &RegimeConfig) -> Result<f64> {
    let regime = classify_regime(q, p_bound, cfg)?;
    Ok(envelope_e_in(regime, q as f64, p_bound as f64, cfg))
}

fn envelope_e_in(regime: Regime, q: f64, p: f64, cfg: &RegimeConfig) -> f64 {
    let eps = cfg.epsilon;
    let e = match regime {
        Regime::SmallQ => p / q,
        Regime::MediumQ => p / q.powf(0.75) + p.powf(0.9) / q.powf(0.375),
        Regime::LargeQ => {
            p.powf(31.0 / 32.0) / q.powf((1.0 - eps) / 2.0)
                + p.powf(5.0 / 6.0) / q.powf((0.75 - eps) / 2.0)
        }
    };
    e * cfg.o1_factor
}

/// Bound `B_q(x)` for Kloosterman sums over primes `p <= x`. Requires `q >= 2`, `x >= 2`.
pub fn bound_b(q: u64, x: u64, cfg: &RegimeConfig) -> Result<f64> {
    cfg.validate()?;
    if q < 2 {
        return Err(Error::InvalidArgument(format!(
            "B_q(x) needs q >= 2, got {q}"
        )));
    }
    if x < 2 {
        return Err(Error::InvalidArgument(format!(
            "B_q(x) needs x >= 2, got {x}"
        )));
    }
    let regime = regime_of(q, x, cfg);
    let (qf, xf) = (q as f64, x as f64);
    Ok(match regime {
        Regime::SmallQ => xf / qf * cfg.o1_factor,
        Regime::MediumQ => (xf / qf.sqrt() + qf.powf(0.25) * xf.powf(0.8)) * cfg.o1_factor,
        Regime::LargeQ => {
            (xf.powf(15.0 / 16.0) + qf.powf(0.25) * xf.powf(2.0 / 3.0)) * qf.powf(cfg.epsilon)
        }
    })
}

/// Truncation point `D` balancing the head and tail of the Möbius expansion,
/// clamped to `[1, √S]`.
pub fn choose_d(q: u64, p_bound: u64, s_bound: u64, cfg: &RegimeConfig) -> Result<f64> {
    let regime = classify_regime(q, p_bound, cfg)?;
    Ok(choose_d_in(
        regime,
        q as f64,
        p_bound as f64,
        s_bound as f64,
        cfg,
    ))
}

fn choose_d_in(regime: Regime, q: f64, p: f64, s: f64, cfg: &RegimeConfig) -> f64 {
    let raw = match regime {
        Regime::SmallQ => s.sqrt() * cfg.o1_factor,
        Regime::MediumQ => {
            (p * s / (p * q.sqrt() + q.powf(1.25) * p.powf(0.8))).sqrt() * cfg.o1_factor
        }
        Regime::LargeQ => (p * s
            / (q.powf(1.0 + cfg.epsilon)
                * (p.powf(15.0 / 16.0) + q.powf(0.25) * p.powf(2.0 / 3.0))))
        .sqrt(),
    };
    raw.clamp(1.0, s.sqrt().max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEnvelope {
    pub regime: Regime,
    pub e: f64,
    /// `B_q(P)`; absent for `q = 1`, where the bound is not defined.
    pub b: Option<f64>,
    pub d: f64,
}

pub fn error_envelope(
    q: u64,
    p_bound: u64,
    s_bound: u64,
    cfg: &RegimeConfig,
) -> Result<ErrorEnvelope> {
    let regime = classify_regime(q, p_bound, cfg)?;
    let (qf, pf, sf) = (q as f64, p_bound as f64, s_bound as f64);
    Ok(ErrorEnvelope {
        regime,
        e: envelope_e_in(regime, qf, pf, cfg),
        b: if q >= 2 {
            Some(bound_b(q, p_bound, cfg)?)
        } else {
            None
        },
        d: choose_d_in(regime, qf, pf, sf, cfg),
    })
}

/// The envelope as printed next to the one obtained by substituting `D` back into
/// `P^{1/2} S^{1/2} (·)^{1/2} / q` and dividing by `S^{1/2}`. The two differ only
/// by the `√(x+y) <= √x + √y` step, so `derived <= displayed <= √2·derived`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCrossCheck {
    pub regime: Regime,
    pub displayed: f64,
    pub derived: f64,
}

impl EnvelopeCrossCheck {
    pub fn ratio(&self) -> f64 {
        self.displayed / self.derived
    }
}

pub fn envelope_cross_check(
    q: u64,
    p_bound: u64,
    cfg: &RegimeConfig,
) -> Result<EnvelopeCrossCheck> {
    let regime = classify_regime(q, p_bound, cfg)?;
    let (qf, p) = (q as f64, p_bound as f64);
    let displayed = envelope_e_in(regime, qf, p, cfg);
    let inner = match regime {
        Regime::SmallQ => p,
        Regime::MediumQ => p * qf.sqrt() + qf.powf(1.25) * p.powf(0.8),
        Regime::LargeQ => {
            qf.powf(1.0 + cfg.epsilon) * (p.powf(15.0 / 16.0) + qf.powf(0.25) * p.powf(2.0 / 3.0))
        }
    };
    let derived = (p * inner).sqrt() / qf * cfg.o1_factor;
    Ok(EnvelopeCrossCheck {
        regime,
        displayed,
        derived,
    })
}

/// π_q(P)·s_q(S)/q.
pub fn main_term(
    tables: &SieveTables,
    ctx: &ModulusContext,
    p_bound: u64,
    s_bound: u64,
) -> Result<f64> {
    let pi = pi_q(tables, p_bound, ctx)?;
    let s = s_q(tables, s_bound, ctx)?;
    Ok(pi as f64 * s as f64 / ctx.q() as f64)
}

/// π_q(P)·s_q(S)/φ(q), the exact mean of N^#_{a,q}(P,S) over the φ(q) reduced classes.
pub fn class_mean_term(
    tables: &SieveTables,
    ctx: &ModulusContext,
    p_bound: u64,
    s_bound: u64,
) -> Result<f64> {
    let pi = pi_q(tables, p_bound, ctx)?;
    let s = s_q(tables, s_bound, ctx)?;
    Ok(pi as f64 * s as f64 / ctx.phi() as f64)
}

/// Density prediction for s_q(S): (φ(q)/q)·(6/π²)·∏_{p|q}(1 − p^{-2})^{-1}·S.
pub fn predicted_s_q(ctx: &ModulusContext, s_bound: u64) -> f64 {
    let local: f64 = ctx
        .prime_divisors()
        .iter()
        .map(|&p| 1.0 / (1.0 - 1.0 / (p as f64 * p as f64)))
        .product();
    ctx.phi() as f64 / ctx.q() as f64 * (6.0 / (PI * PI)) * local * s_bound as f64
}

/// φ(q)·π_q(P)·S/q.
pub fn predicted_n_q(
    tables: &SieveTables,
    ctx: &ModulusContext,
    p_bound: u64,
    s_bound: u64,
) -> Result<f64> {
    let pi = pi_q(tables, p_bound, ctx)?;
    Ok(ctx.phi() as f64 * pi as f64 * s_bound as f64 / ctx.q() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Positivity {
    pub regime: Regime,
    pub holds: bool,
    pub condition: &'static str,
}

/// Sufficient condition for N^#_{a,q}(P,S) > 0 in the regime of `q`, with `≫`
/// read as `>= c·`. Evaluated in logarithms.
pub fn positivity_conditions(
    q: u64,
    p_bound: u64,
    s_bound: u64,
    cfg: &RegimeConfig,
) -> Result<Positivity> {
    let regime = classify_regime(q, p_bound, cfg)?;
    let (lq, lp, ls) = (
        (q as f64).ln(),
        (p_bound as f64).ln(),
        (s_bound as f64).ln(),
    );
    let lc = cfg.positivity_constant.ln();
    let eps = cfg.epsilon;
    let lps_eps = eps * (lp + ls);
    let (holds, condition) = match regime {
        Regime::SmallQ => (ls >= lc + eps * lp, "S >= c*P^eps"),
        Regime::MediumQ => (
            2.0 * ls >= lc + lps_eps + lq && 4.0 * lp + 20.0 * ls >= lc + lps_eps + 25.0 * lq,
            "S^2 >= c*(PS)^eps*q and P^4*S^20 >= c*(PS)^eps*q^25",
        ),
        Regime::LargeQ => (
            lp + 16.0 * ls >= lc + lps_eps + 16.0 * lq
                && 4.0 * lp + 12.0 * ls >= lc + lps_eps + 15.0 * lq,
            "P*S^16 >= c*(PS)^eps*q^16 and P^4*S^12 >= c*(PS)^eps*q^15",
        ),
    };
    Ok(Positivity {
        regime,
        holds,
        condition,
    })
}

/// Exact count against the main term and the `√S·E` envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountReport {
    pub instance: ProblemInstance,
    pub exact: u64,
    pub main_term: f64,
    pub abs_error: f64,
    /// `√S · E`.
    pub envelope: f64,
    pub normalized_error: f64,
    pub regime: Regime,
    pub d: f64,
    /// `q > P^10`: outside any reasonable reading of `q <= P^{O(1)}`.
    pub beyond_poly_range: bool,
}

impl CountReport {
    /// Assemble a report from a prebuilt counter for the instance's `(q, P, S)`.
    pub fn from_counter(
        counter: &ResidueCounter<'_>,
        inst: &ProblemInstance,
        cfg: &RegimeConfig,
    ) -> Result<Self> {
        if counter.q() != inst.q()
            || counter.p_bound() != inst.p_bound()
            || counter.s_bound() != inst.s_bound()
        {
            return Err(Error::InvalidArgument(
                "counter does not match instance".into(),
            ));
        }
        let env = error_envelope(inst.q(), inst.p_bound(), inst.s_bound(), cfg)?;
        let exact = counter.count_exact(inst.a());
        let main = counter.pi_q() as f64 * counter.s_q() as f64 / inst.q() as f64;
        let abs_error = (exact as f64 - main).abs();
        let envelope = (inst.s_bound() as f64).sqrt() * env.e;
        let pf = inst.p_bound() as f64;
        Ok(Self {
            instance: *inst,
            exact,
            main_term: main,
            abs_error,
            envelope,
            normalized_error: abs_error / envelope,
            regime: env.regime,
            d: env.d,
            beyond_poly_range: (inst.q() as f64).ln() > POLY_RANGE_EXPONENT * pf.ln(),
        })
    }
}

pub fn build_report(
    tables: &SieveTables,
    inst: &ProblemInstance,
    cfg: &RegimeConfig,
) -> Result<CountReport> {
    cfg.validate()?;
    let ctx = build_modulus_context(inst.q())?;
    let counter = ResidueCounter::new(tables, &ctx, inst.p_bound(), inst.s_bound())?;
    CountReport::from_counter(&counter, inst, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_sieve;

    fn cfg() -> RegimeConfig {
        RegimeConfig::default()
    }

    #[test]
    fn regimes_at_million() {
        let c = cfg();
        assert_eq!(classify_regime(2, 1_000_000, &c).unwrap(), Regime::SmallQ);
        assert_eq!(
            classify_regime(10_000, 1_000_000, &c).unwrap(),
            Regime::MediumQ
        );
        assert_eq!(
            classify_regime(100_000, 1_000_000, &c).unwrap(),
            Regime::LargeQ
        );
        assert_eq!(
            classify_regime(3, 2, &c),
            Err(Error::DegenerateRange { q: 3, p_bound: 2 })
        );
        assert_eq!(classify_regime(1, 2, &c).unwrap(), Regime::SmallQ);
    }

    #[test]
    fn boundary_ties() {
        // 10^4 = (10^{16/3})^{3/4}; pick P = 2^16 so P^{3/4} = 4096 exactly.
        let c = cfg();
        assert_eq!(classify_regime(4096, 65_536, &c).unwrap(), Regime::LargeQ);
        assert_eq!(classify_regime(4095, 65_536, &c).unwrap(), Regime::MediumQ);
        // (log e^4)^2 = 16 needs an integer P; use A = 1 and P with log P slightly above q.
        let c1 = RegimeConfig {
            a_exponent: 1.0,
            ..cfg()
        };
        assert_eq!(classify_regime(2, 8, &c1).unwrap(), Regime::SmallQ); // ln 8 = 2.079
        assert_eq!(classify_regime(3, 8, &c1).unwrap(), Regime::MediumQ);
    }

    #[test]
    fn envelope_small() {
        let c = cfg();
        assert_eq!(envelope_e(2, 100, &c).unwrap(), 50.0);
        assert_eq!(bound_b(2, 100, &c).unwrap(), 50.0);
        assert!(bound_b(1, 100, &c).is_err());
        assert!(bound_b(2, 1, &c).is_err());
    }

    #[test]
    fn envelope_scales_with_o1() {
        let c = RegimeConfig {
            o1_factor: 3.0,
            ..cfg()
        };
        assert_eq!(envelope_e(2, 100, &c).unwrap(), 150.0);
    }

    #[test]
    fn d_clamps() {
        let c = cfg();
        assert_eq!(choose_d(2, 100, 100, &c).unwrap(), 10.0);
        // Large q, tiny S: formula below 1.
        assert_eq!(choose_d(1_000_000, 1000, 4, &c).unwrap(), 1.0);
    }

    #[test]
    fn density_predictions() {
        let c1 = build_modulus_context(1).unwrap();
        assert!((predicted_s_q(&c1, 1_000_000) - 607_927.101_854_0).abs() < 1e-3);
        assert!((predicted_s_q(&c1, 1) - 0.607_927_1).abs() < 1e-6);
        let t = build_sieve(100).unwrap();
        let c3 = build_modulus_context(3).unwrap();
        assert_eq!(predicted_n_q(&t, &c3, 10, 10).unwrap(), 20.0);
        assert_eq!(predicted_n_q(&t, &c1, 10, 10).unwrap(), 40.0);
        let c2 = build_modulus_context(2).unwrap();
        assert_eq!(predicted_n_q(&t, &c2, 10, 100).unwrap(), 150.0);
    }

    #[test]
    fn main_terms() {
        let t = build_sieve(100).unwrap();
        let c3 = build_modulus_context(3).unwrap();
        assert_eq!(main_term(&t, &c3, 10, 10).unwrap(), 5.0);
        assert_eq!(class_mean_term(&t, &c3, 10, 10).unwrap(), 7.5);
        assert_eq!(main_term(&t, &c3, 1, 10).unwrap(), 0.0);
        let c1 = build_modulus_context(1).unwrap();
        assert_eq!(main_term(&t, &c1, 10, 10).unwrap(), 28.0);
    }

    #[test]
    fn positivity_cases() {
        let c = cfg();
        let p = positivity_conditions(2, 1_000_000, 1000, &c).unwrap();
        assert_eq!(p.regime, Regime::SmallQ);
        assert!(p.holds);
        let p = positivity_conditions(1_000_000, 1_000_000, 1, &c).unwrap();
        assert_eq!(p.regime, Regime::LargeQ);
        assert!(!p.holds);
    }

    #[test]
    fn report_small() {
        let t = build_sieve(100).unwrap();
        let i = ProblemInstance::new(1, 3, 10, 10).unwrap();
        let r = build_report(&t, &i, &cfg()).unwrap();
        assert_eq!(r.exact, 7);
        assert_eq!(r.main_term, 5.0);
        assert_eq!(r.abs_error, 2.0);
        let i = ProblemInstance::new(1, 1, 10, 10).unwrap();
        let r = build_report(&t, &i, &cfg()).unwrap();
        assert_eq!(r.abs_error, 0.0);
        assert!(!r.beyond_poly_range);
    }

    #[test]
    fn invalid_config() {
        let bad = RegimeConfig {
            epsilon: 0.0,
            ..cfg()
        };
        assert!(classify_regime(5, 100, &bad).is_err());
        assert!("Tiny".parse::<Regime>().is_err());
        assert_eq!("MediumQ".parse::<Regime>().unwrap(), Regime::MediumQ);
    }
}
