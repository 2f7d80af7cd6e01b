//! Error type shared by every module in this crate.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building plans, signatures,
/// predictions, or rankings.
///
/// Variants are deliberately fine-grained so callers (and the CLI) can
/// distinguish validation failures from I/O problems.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("series is empty")]
    EmptySeries,

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series start timestamps differ: {left} vs {right}")]
    StartMismatch { left: usize, right: usize },

    #[error("duplicate attribute {0:?}")]
    DuplicateAttribute(String),

    #[error("series too short: length {len}, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("reference series has zero range")]
    ZeroRange,

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("requested [{start}, {start}+{len}) lies outside [{available_start}, {available_start}+{available_len})")]
    OutOfRange {
        start: usize,
        len: usize,
        available_start: usize,
        available_len: usize,
    },

    #[error("observations disagree on the attribute set: expected {expected:?}, found {found:?}")]
    AttributeMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("no observation covers timestamps {missing:?}")]
    CoverageGap { missing: Vec<usize> },

    #[error("no observations supplied")]
    NoObservations,

    #[error("workload is empty")]
    EmptyWorkload,

    #[error("trial length must be at least 1")]
    ZeroTrialLength,

    #[error("trial length {trial} exceeds workload length {workload}")]
    TrialTooLong { trial: usize, workload: usize },

    #[error("VM count must be at least 1")]
    ZeroVmCount,

    #[error("workload has {have} timestamps but {need} VMs were requested")]
    TooFewWorkloads { have: usize, need: usize },

    #[error("capacity must be positive and finite, got {0}")]
    InvalidCapacity(f64),

    #[error("negative demand {value} at index {index}")]
    NegativeDemand { index: usize, value: f64 },

    #[error("invalid window: start {start} must be >= 1 and <= end {end}")]
    InvalidWindow { start: usize, end: usize },

    #[error("window [{start}, {end}] does not match the plan or horizon")]
    WindowMismatch { start: usize, end: usize },

    #[error("no attributes in common between observation and signature")]
    NoAttributes,

    #[error("trial plan has no entries")]
    EmptyPlan,

    #[error("signature period {period} does not cover timestamp {required}")]
    SignatureTooShort { period: usize, required: usize },

    #[error("signature value for {attribute:?} is zero at timestamp {timestamp}")]
    ZeroSignatureValue { attribute: String, timestamp: usize },

    #[error("series length {found} does not match horizon {expected}")]
    HorizonMismatch { expected: usize, found: usize },

    #[error("no predictions supplied")]
    NoPredictions,

    #[error("predictions mix discovery methods")]
    MethodMismatch,

    #[error("duplicate provider {0:?}")]
    DuplicateProvider(String),

    #[error("orders are not permutations of the same id set")]
    NotPermutation,

    #[error("invalid provider profile: {0}")]
    InvalidProfile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("non-finite demand at line {line}")]
    NonFiniteValue { line: usize },

    #[error("no capacity given: pass an explicit capacity or add a `# capacity = <value>` comment to the trace")]
    MissingCapacity,

    #[error("unsupported schema version {found}, this build reads version {supported}")]
    UnsupportedSchema { found: u32, supported: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
