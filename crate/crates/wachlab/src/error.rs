use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WachError {
    #[error("not a unit: valuation {0}")]
    NonUnit(u32),
    #[error("exponential series diverges at valuation {val} for p = {p}")]
    Divergent { p: u64, val: u32 },
    #[error("character value is not congruent to 1 mod p^{m}")]
    BadCharacterValue { m: u32 },
    #[error("not divisible: {0}")]
    NotDivisible(String),
    #[error("integrality violation: {0}")]
    IntegralityViolation(String),
    #[error("insufficient truncation degree: {0}")]
    InsufficientDegree(String),
    #[error("element is zero to precision")]
    ZeroElement,
    #[error("flavor mismatch: {0}")]
    FlavorMismatch(String),
    #[error("exponent box overflow: exponent {exp} outside [-{bound}, {bound}]")]
    BoxOverflow { exp: i64, bound: i32 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("consistency violation at degree {degree}, index {index:?}: {detail}")]
    ConsistencyViolation {
        degree: usize,
        index: Vec<usize>,
        detail: String,
    },
    #[error("uniqueness violation: {0}")]
    UniquenessViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, WachError>;
