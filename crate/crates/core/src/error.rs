use thiserror::Error;

/// Errors raised by the construction and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("denominator is empty or identically zero")]
    ZeroDenominator,
    #[error("transfer function is not strictly proper (deg num {num} >= deg den {den})")]
    NotStrictlyProper { num: usize, den: usize },
    #[error("numerator and denominator share a common factor near z = {re} + {im}i")]
    NotCoprime { re: f64, im: f64 },
    #[error("coefficients must be finite")]
    NonFinite,
    #[error("transfer function is not primitive: {0}")]
    NotPrimitive(String),
    #[error("dominant residue {0} is not positive")]
    NonpositiveDominantResidue(f64),
    #[error("partial fraction expansion failed to reproduce H(z): residual {0:e}")]
    ExpansionInaccurate(f64),
    #[error("invalid partial fraction data: {0}")]
    InvalidPartialFraction(String),
    #[error("pole {re} + {im}i has modulus >= 1; no polygon contains it")]
    NoPolygonIndex { re: f64, im: f64 },
    #[error("multiple non-dominant pole at {re} + {im}i (order {order}) is not supported")]
    MultiplePoleUnsupported { re: f64, im: f64, order: usize },
    #[error("invalid pole block: {0}")]
    BadPoleBlock(String),
    #[error("dominant share {available} is below the required {required}")]
    BudgetTooSmall { required: f64, available: f64 },
    #[error("pole {re} + {im}i is not inside polygon P_{polygon}")]
    NotInPolygon { re: f64, im: f64, polygon: usize },
    #[error("barycentric decomposition failed for generator {0}")]
    DegenerateBarycentric(usize),
    #[error("dominant budget exhausted: required {required}, available 1")]
    InsufficientBudget { required: f64 },
    #[error("block failed its build-time Markov check: {0}")]
    BlockCheckFailed(String),
    #[error("leftover dominant share {0} is negative")]
    LeftoverNegative(f64),
    #[error("impulse prefix entry t_{index} = {value} is negative")]
    NegativePrefix { index: usize, value: f64 },
    #[error("impulse response entry t_{index} = {value} is negative")]
    NegativeImpulse { index: usize, value: f64 },
    #[error("{what}[{index}] = {value} is negative")]
    NegativeEntry {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("base realization does not match the shifted impulse response (t_{index}: {expected} vs {actual})")]
    BaseMismatch {
        index: usize,
        expected: f64,
        actual: f64,
    },
    #[error("lower bound not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid root-bound input: {0}")]
    InvalidRootBoundInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
