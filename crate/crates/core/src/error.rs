use thiserror::Error;

/// Errors raised by the library. Check failures are never errors; they are
/// reported through the report types.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("division by an element indistinguishable from zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("limit did not stabilize by k = {cap}")]
    StabilizationCap { cap: u32 },
    #[error("series term cap {0} exceeded")]
    SeriesCap(usize),
    #[error("non-rational residue has valuation {found}, need {needed}")]
    ResidueTolerance { found: String, needed: i64 },
    #[error("working precision p^{0} exceeds the 63-bit residue ring")]
    PrecisionOverflow(u32),
    #[error("unsupported conductor shape: {0}")]
    UnsupportedConductor(u64),
    #[error("search space too large: {0} candidates")]
    SearchCap(u128),
}

pub type Result<T> = std::result::Result<T, Error>;
