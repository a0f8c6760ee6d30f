use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid calendar date {year:04}-{month:02}-{day:02}")]
    InvalidDate { year: i32, month: u8, day: u8 },
    #[error("cannot parse date {0:?}, expected YYYY-MM-DD")]
    DateParse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("time expression {surface:?} does not fit bucket {bucket}")]
    PatternMismatch { surface: String, bucket: &'static str },
    #[error("span {start}..{end} out of bounds for sentence of length {len}")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("label sequence is not monotone (PRE* MID* POST*)")]
    NonMonotone,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("need at least two patients to split, found {0}")]
    TooFewPatients(usize),
}
