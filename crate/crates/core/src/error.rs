use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("matrix is not rectangular: row {row} has {got} entries, expected {expected}")]
    RaggedMatrix { row: usize, got: usize, expected: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("entry ({row}, {col}) is negative: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("entry ({row}, {col}) = {value:e} is positive but below 1e-12")]
    TinyEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    RowSumOutOfTolerance { row: usize, sum: f64 },
    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("maximizer list is empty")]
    EmptyMaximizerList,
    #[error("rate {rate} is outside the open interval ({lo}, {hi})")]
    RateOutOfOpenInterval { rate: f64, lo: f64, hi: f64 },
    #[error("channel is degenerate: E_o is linear in rho (R_cr = C)")]
    DegenerateChannel,
    #[error("optimizer did not converge: {0}")]
    OptimizerDidNotConverge(String),
    #[error("no maximizer found")]
    NoMaximizerFound,
    #[error("support of Q x W is empty")]
    EmptySupport,
    #[error("pair is not singular")]
    NotSingular,
    #[error("pair is not nonsingular")]
    NotNonsingular,
    #[error("Esseen constant must be positive, got {0}")]
    EsseenConstantNonpositive(f64),
    #[error("Q does not maximize E_o(1, .): E_o(1,Q) = {got}, max = {max}")]
    QNotEoOptimal { got: f64, max: f64 },
    #[error("rate {rate} exceeds the critical rate {r_cr}")]
    RateAboveCritical { rate: f64, r_cr: f64 },
    #[error("law has zero variance")]
    ZeroVariance,
    #[error("threshold {q} must lie strictly between {lo} and {hi}")]
    ThresholdOutOfRange { q: f64, lo: f64, hi: f64 },
    #[error("support size {size} exceeds cap {cap}")]
    SupportExplosion { size: usize, cap: usize },
    #[error("covariance is singular (smallest eigenvalue {0:e})")]
    SingularCovariance(f64),
    #[error("law is not centered: mean = ({0:e}, {1:e})")]
    NotCentered(f64, f64),
    #[error("joint type count {count} exceeds cap {cap}")]
    TooManyTypes { count: f64, cap: f64 },
    #[error("brute force needs {ops:e} operations, cap is {cap:e}")]
    CapExceeded { ops: f64, cap: f64 },
    #[error("Monte-Carlo work {work:e} exceeds budget {budget:e}")]
    BudgetExceeded { work: f64, budget: f64 },
    #[error("need at least {need} points, got {got}")]
    InsufficientPoints { need: usize, got: usize },
    #[error("log-likelihood atom {0:e} is within tie tolerance of zero but not zero")]
    NearTieAtom(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
