use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected an odd prime, got {0}")]
    InvalidPrime(u32),

    #[error("residue degree must be at least 1")]
    InvalidDegree,

    #[error("operands live over different primes ({left} vs {right})")]
    PrimeMismatch { left: u32, right: u32 },

    #[error("{b} is not coprime to {p}")]
    NotCoprime { b: i64, p: u32 },

    #[error("inexact division: {0}")]
    InexactDivision(String),

    #[error("operands belong to incompatible towers")]
    TowerMismatch,

    #[error("operation {op} is not defined at level {level}")]
    WrongLevel { op: &'static str, level: &'static str },

    #[error("element does not lie in {field} at precision {precision}")]
    NotInSubfield { field: &'static str, precision: i64 },

    #[error("zero residue class has no Teichmuller lift")]
    ZeroResidue,

    #[error("series does not converge: valuation of a - 1 is {0}")]
    Divergent(String),

    #[error("Kummer generator is not congruent to 1 + gamma * unit: {0}")]
    BadKummerGenerator(String),

    #[error("precision exhausted: {0}")]
    PrecisionLoss(String),

    #[error("verification failed: {0}")]
    CheckFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
