use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent a = {0} is outside (0, 1)")]
    ExponentOutOfRange(f64),
    #[error("sample length {requested} exceeds the configured maximum {max}")]
    SampleTooLong { requested: u64, max: u64 },
    #[error("length must be at least 1")]
    EmptyLength,
    #[error("sequence has {available} terms but {required} are required")]
    SequenceTooShort { required: u64, available: u64 },
    #[error("sample has {available} selection bits but {required} are required")]
    SampleTooShort { required: u64, available: u64 },
    #[error("window [{lo}, {hi}] has fewer than {min} indices inside a sequence of {len} terms")]
    WindowOutOfRange { lo: u64, hi: u64, len: u64, min: u64 },
    #[error("value table has {found} entries, modulus is {modulus}")]
    TableSize { modulus: u64, found: usize },
    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("vectors have mismatched dimensions ({expected} vs {found})")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("M = {m} is outside [1, {n}]")]
    LagOutOfRange { m: usize, n: usize },
    #[error("grid size {grid} does not exceed pi times the degree {degree}")]
    GridTooCoarse { grid: usize, degree: usize },
    #[error("combined degree {degree} exceeds grid capacity {capacity}")]
    DegreeTooLarge { degree: usize, capacity: usize },
    #[error("invalid probability {value} at n = {n}")]
    InvalidProbability { n: u64, value: f64 },
    #[error("partial permutation is undefined at {0}")]
    PermutationUndefined(i64),
    #[error("sequence {name} is not injective with nonzero values on [1, {horizon}]")]
    NotInjective { name: &'static str, horizon: u64 },
    #[error("permutation constraints are infeasible at n = {0}")]
    Infeasible(u64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}
