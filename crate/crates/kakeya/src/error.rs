use thiserror::Error;

#[derive(Debug, Error)]
#[error("cannot parse {input:?} as a rational: {reason}")]
pub struct ParseRatError {
    pub input: String,
    pub reason: &'static str,
}

impl ParseRatError {
    pub fn new(input: &str, reason: &'static str) -> Self {
        ParseRatError {
            input: input.to_owned(),
            reason,
        }
    }
}

/// Errors from the series-term and tail-bound layer.
#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("series index and factor count must be positive (got n={n}, f={f})")]
    DomainZero { n: u64, f: u64 },
    #[error("tail formula requires N >= 1")]
    TailDegenerate,
    #[error("stage tail diverges for j = 1 (harmonic-type series)")]
    StageTailDivergent,
}

/// Errors from choice-set classification and greedy representation.
#[derive(Debug, Error)]
pub enum AchievementError {
    #[error("choice set at index {index} must have at least two elements")]
    TooFewElements { index: usize },
    #[error("choice set at index {index} must be strictly ascending and nonnegative")]
    NotAscending { index: usize },
    #[error("no feasible choice at index {index}: residual {residual} cannot reach the next span")]
    NoFeasibleChoice { index: usize, residual: String },
    #[error("target {target} lies outside the achievable interval [{lo}, {hi}]")]
    TargetOutOfRange {
        target: String,
        lo: String,
        hi: String,
    },
    #[error("classification precondition not established: {0}")]
    PreconditionNotEstablished(String),
    #[error("enumeration would visit {needed} tuples, above the cap {cap}")]
    EnumerationCap { needed: u128, cap: u128 },
    #[error("condition r_n < delta_n not certified at index {index}")]
    Cond2NotCertified { index: usize },
    #[error("depth {depth} exceeds the materialized prefix of length {len}")]
    DepthBeyondPrefix { depth: usize, len: usize },
}

/// Errors from the representation builder.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid target range: need 0 < theta < M and theta <= target <= M")]
    InvalidRange,
    #[error("target {target} lies outside [{theta}, {m}]")]
    TargetOutOfRange {
        target: String,
        theta: String,
        m: String,
    },
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error(
        "tolerance {tolerance} unreachable within {max_stages} stages; achieved width {achieved}"
    )]
    ToleranceUnreachable {
        tolerance: String,
        achieved: String,
        max_stages: usize,
    },
    #[error("no feasible grid index at stage {j} (residual {residual})")]
    NoFeasibleGridIndex { j: u32, residual: String },
    #[error("stage {j} greedy scan exceeded {cap} terms without meeting its budget")]
    GreedyScanCap { j: u32, cap: u64 },
    #[error("infeasible stage target: p={p} exceeds the certified zero-segment bound {bound}")]
    InfeasibleStageTarget { p: String, bound: String },
    #[error("budget must be positive")]
    NonPositiveBudget,
    #[error("malformed certificate: {0}")]
    Certificate(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Errors from the monotone cover / landscape machinery.
#[derive(Debug, Error)]
pub enum CoverError {
    #[error("tuple must be nondecreasing with entries in 1..={cap}")]
    BadTuple { cap: u64 },
    #[error("bound requires N >= max(K, 3); got N={n}, K={k}")]
    BoundPrecondition { n: u64, k: u64 },
    #[error("enumeration would visit {needed} assignments, above the cap {cap}")]
    EnumerationCap { needed: u128, cap: u128 },
    #[error("landscape spec has an empty range at position {index}")]
    EmptyRange { index: usize },
}
