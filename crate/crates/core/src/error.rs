//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants carry enough context
//! (line numbers, rule names) that a caller can report precisely which input
//! was rejected and why.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },

    #[error("malformed value in column `{column}` on line {line}")]
    MalformedRow { line: u64, column: String },

    #[error("line {line} violates invariant: {rule}")]
    InvariantViolation { line: u64, rule: String },

    #[error("game {game_id}: clock increases within period {period} (line {line})")]
    OrderingViolation {
        game_id: String,
        period: u32,
        line: u64,
    },

    #[error("unknown event kind `{kind}` on line {line}")]
    UnknownEventKind { line: u64, kind: String },

    #[error("free throw index {index} exceeds set size {set_size} on line {line}")]
    DanglingFreeThrow {
        line: u64,
        index: u8,
        set_size: u8,
    },

    #[error("game {game_id}: event team `{team_id}` is neither home nor away")]
    UnknownTeam { game_id: String, team_id: String },

    #[error("game {game_id}: period {period} does not end with a period_end event")]
    MissingPeriodEnd { game_id: String, period: u32 },

    #[error("expected a free throw event, got {got}")]
    WrongEventKind { got: &'static str },

    #[error("game {game_id}: inconsistent stream: {detail}")]
    InconsistentStream { game_id: String, detail: String },

    #[error("no events in scope for {what}")]
    EmptyScope { what: &'static str },

    #[error("opponent defensive rebounds are required for the exact rebounding rate")]
    MissingOpponentRebounds,

    #[error("division by zero computing {what}")]
    DivisionByZero { what: &'static str },

    #[error("possession estimate is not positive")]
    NegativePossessions,

    #[error("rating denominator is degenerate (non-positive or non-finite)")]
    DegenerateDenominator,

    #[error("perturbed {factor} = {value} leaves the valid domain")]
    DomainExit { factor: &'static str, value: f64 },

    #[error("gradient has no non-zero component after weighting")]
    ZeroGradient,

    #[error("no crossover point exists for the given reference")]
    NoCrossover,

    #[error("unknown multiplier component `{name}`")]
    UnknownComponent { name: String },

    #[error("invalid simulation parameters: {reason}")]
    InvalidParams { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the error kind, used by the CLI
    /// when reporting failures on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            Error::HeaderMismatch { .. } => "HeaderMismatch",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::OrderingViolation { .. } => "OrderingViolation",
            Error::UnknownEventKind { .. } => "UnknownEventKind",
            Error::DanglingFreeThrow { .. } => "DanglingFreeThrow",
            Error::UnknownTeam { .. } => "UnknownTeam",
            Error::MissingPeriodEnd { .. } => "MissingPeriodEnd",
            Error::WrongEventKind { .. } => "WrongEventKind",
            Error::InconsistentStream { .. } => "InconsistentStream",
            Error::EmptyScope { .. } => "EmptyScope",
            Error::MissingOpponentRebounds => "MissingOpponentRebounds",
            Error::DivisionByZero { .. } => "DivisionByZero",
            Error::NegativePossessions => "NegativePossessions",
            Error::DegenerateDenominator => "DegenerateDenominator",
            Error::DomainExit { .. } => "DomainExit",
            Error::ZeroGradient => "ZeroGradient",
            Error::NoCrossover => "NoCrossover",
            Error::UnknownComponent { .. } => "UnknownComponent",
            Error::InvalidParams { .. } => "InvalidParams",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
        }
    }

    /// True for errors caused by the execution environment rather than the
    /// input data (drives the CLI's exit-code split).
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_)) || matches!(self, Error::Csv(e) if e.is_io_error())
    }
}
