#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("modulus {0} is even; an odd prime is required")]
    EvenModulus(u64),
    #[error("modulus {0} is out of range; expected 3 <= p < 2^61")]
    ModulusOutOfRange(u64),
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("element {value} is not a canonical residue mod {p}")]
    ElementOutOfRange { value: u64, p: u64 },
    #[error("shift {0} appears more than once; shifts must be pairwise distinct")]
    DuplicateShift(u64),
    #[error("a family needs at least one shift")]
    EmptyFamily,
    #[error("family size {n} exceeds the field size {p}")]
    FamilyTooLarge { n: usize, p: u64 },
    #[error("no residue table for p = {p} (above 2^26); use the scan variant")]
    TableUnavailable { p: u64 },
    #[error("arguments must be pairwise distinct")]
    NotDistinct,
    #[error("trace {t} violates the Hasse bound for p = {p}")]
    HasseViolation { t: i64, p: u64 },
    #[error("invalid interval [{lo}, {hi}]: {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: &'static str },
    #[error("the covering set is empty")]
    EmptySet,
    #[error(
        "estimated cost {estimated} kernel visits exceeds the budget of {budget}; \
         {suggestion}"
    )]
    BudgetExceeded {
        estimated: u128,
        budget: u128,
        suggestion: &'static str,
    },
    #[error("internal consistency failure: {0}")]
    Inconsistency(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
