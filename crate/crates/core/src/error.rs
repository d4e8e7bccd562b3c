use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("prime power {p}^{k} does not fit in 64 bits")]
    PrimePowerOverflow { p: u64, k: u32 },
    #[error("value {value} out of range {range}")]
    OutOfRange { value: String, range: String },
    #[error("invalid interval {lo}..{hi} for modulus {q}")]
    InvalidInterval { lo: u64, hi: u64, q: u64 },
    #[error("alpha {alpha} lies in L modulo {q}")]
    AlphaInL { alpha: String, q: u64 },
    #[error("polynomial has zero leading coefficient")]
    ZeroPolynomial,
    #[error("ground-set size mismatch: spec has n = {spec}, family has n = {family}")]
    GroundSetMismatch { spec: usize, family: usize },
    #[error("ground-set size {0} exceeds the supported limit {1}")]
    GroundSetTooLarge(usize, usize),
    #[error("set {set} is not a subset of [{n}]")]
    NotASubset { set: String, n: usize },
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("family is not an antichain: {0}")]
    NotAntichain(String),
    #[error("push to the middle needs 2s <= n (s = {s}, n = {n})")]
    PushRange { s: usize, n: usize },
    #[error("no saturating matching between levels {from} and {to}")]
    NoMatching { from: usize, to: usize },
    #[error("family member outside band [{lo}, {hi}]; run push_to_middle first")]
    OutsideBand { lo: usize, hi: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no bound rule applies: {0}")]
    NoApplicableRule(String),
    #[error("separation check failed for residue class {0}")]
    SeparationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
