use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("arm {index} has mean {value} outside [0, 1]")]
    MeanOutOfRange { index: usize, value: f64 },
    #[error("no unique best arm: maximum mean {0} is attained more than once")]
    TiedBestArm(f64),
    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("KL divergence to a degenerate Bernoulli({0}) is infinite")]
    DegenerateKl(f64),
    #[error("{0} requires all means strictly inside (0, 1)")]
    BoundaryMeans(&'static str),
    #[error("index j={j} outside valid range {lo}..={hi}")]
    IndexOutOfRange { j: usize, lo: usize, hi: usize },
    #[error("budget {budget} too small: {kind} needs at least {min} pulls for {arms} arms")]
    BudgetTooSmall {
        kind: &'static str,
        budget: u64,
        min: u64,
        arms: usize,
    },
    #[error("theta0 = {value} outside (0, {limit})")]
    Theta0OutOfRange { value: f64, limit: f64 },
    #[error("budget exhausted: all {0} pulls spent")]
    BudgetExhausted(u64),
    #[error("observed arm {got} but round selected arm {expected:?}")]
    ObserveMismatch { got: usize, expected: Option<usize> },
    #[error("recommend called after {t} of {budget} pulls")]
    RecommendTooEarly { t: u64, budget: u64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("subset enumeration too large: C({n}, {k}) = {count} exceeds {limit}")]
    EnumerationTooLarge {
        n: usize,
        k: usize,
        count: u128,
        limit: u128,
    },
    #[error("oracle limited to at most {limit} arms, got {got}")]
    OracleTooLarge { got: usize, limit: usize },
    #[error("unknown {what}: {got}")]
    UnknownName { what: &'static str, got: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
