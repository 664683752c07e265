//! Exact counting and empirical checks for representations `p·s ≡ a (mod q)`
//! with `p <= P` prime and `s <= S` square-free.
//!
//! - [`arith`]: linear and segmented sieves, modular inverses, modulus data.
//! - [`counting`]: π_q(P), s_q(S), N_q(P,S), N_{a,q}(P,S), N^#_{a,q}(P,S) and the
//!   Möbius-decomposition recount.
//! - [`asymptotics`]: main terms, regime envelopes, truncation parameter, positivity.
//! - [`exp_sums`]: Kloosterman sums over primes, orthogonality, discrepancy.
//! - [`sweep`]: grid sweeps with CSV / JSON output.
//! - [`selftest`]: the invariant suite behind `prisq selftest`.

pub mod arith;
pub mod asymptotics;
pub mod counting;
pub mod error;
pub mod exp_sums;
pub mod selftest;
pub mod sweep;

pub use arith::{
    build_modulus_context, build_sieve, mod_inverse, segmented_primes, ModulusContext, SieveTables,
};
pub use asymptotics::{build_report, CountReport, ErrorEnvelope, Regime, RegimeConfig};
pub use counting::{ProblemInstance, ResidueCounter};
pub use error::{Error, Result};
pub use exp_sums::KloostermanValue;
