use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A table, segment, sweep or modulus would exceed its configured budget.
    #[error("capacity exceeded: {what} requested {requested}, allowed {allowed}")]
    Capacity {
        what: &'static str,
        requested: u64,
        allowed: u64,
    },

    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("{x} has no inverse modulo {q}")]
    NoInverse { x: u64, q: u64 },

    #[error("a = {a} is not a reduced residue modulo q = {q}")]
    InvalidResidue { a: u64, q: u64 },

    #[error("degenerate range: log P <= 1 for P = {p_bound} with q = {q}")]
    DegenerateRange { q: u64, p_bound: u64 },

    #[error("sieve tables cover 1..={limit}, but {needed} is required")]
    TableTooSmall { needed: u64, limit: u64 },

    #[error("empty sequence: no primes p <= {p_bound} coprime to {q}")]
    EmptySequence { q: u64, p_bound: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
