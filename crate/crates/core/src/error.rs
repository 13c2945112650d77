use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("valuation table is empty")]
    EmptyTable,
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedTable {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("negative valuation {value} at row {row}, column {col}")]
    NegativeValue { row: usize, col: usize, value: f64 },
    #[error("non-finite valuation at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("at least 2 alternatives are required, got {0}")]
    TooFewAlternatives(usize),
    #[error("row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },

    #[error("district {0} is empty")]
    EmptyDistrict(usize),
    #[error("agent {0} appears in more than one district")]
    DuplicateAgent(usize),
    #[error("agent {0} is not assigned to any district")]
    MissingAgent(usize),
    #[error("agent {agent} is out of range for {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("district {district} is out of range for {k} districts")]
    DistrictOutOfRange { district: usize, k: usize },
    #[error("alternative {alternative} is out of range for {m} alternatives")]
    AlternativeOutOfRange { alternative: usize, m: usize },
    #[error("not a permutation of 0..{len}: {detail}")]
    InvalidPermutation { len: usize, detail: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("rule applied to an empty electorate")]
    EmptyView,

    #[error("invalid scoring vector: {0}")]
    InvalidScoringVector(String),
    #[error("invalid point-voting vector: {0}")]
    InvalidPointVector(String),
    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("lottery probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),

    #[error("unknown rule `{name}`; valid identifiers: {valid}")]
    UnknownRule { name: String, valid: String },
    #[error("mechanism `{0}` is not deterministic")]
    NotDeterministic(String),
    #[error("no exact winner distribution for `{0}`; evaluate it in montecarlo mode")]
    UnsupportedCombination(String),
    #[error("exhaustive search needs m <= {max}, got m = {m}")]
    TooManyAlternatives { m: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("divisibility violated: {0}")]
    Divisibility(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("need {needed} users with complete ratings, only {available} available")]
    InsufficientUsers { needed: usize, available: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
