use thiserror::Error;

use crate::rational::{format_rational, Rational};

pub type Result<T> = std::result::Result<T, Error>;

fn fmt_q(x: &Rational) -> String {
    format_rational(x)
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {} outside domain [{}, {}]", fmt_q(.point), fmt_q(.lo), fmt_q(.hi))]
    OutsideDomain {
        point: Rational,
        lo: Rational,
        hi: Rational,
    },

    #[error("domain mismatch: [{}, {}] vs [{}, {}]", fmt_q(&.left.0), fmt_q(&.left.1), fmt_q(&.right.0), fmt_q(&.right.1))]
    DomainMismatch {
        left: (Rational, Rational),
        right: (Rational, Rational),
    },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("empty interval: need a < b, got a = {}, b = {}", fmt_q(.a), fmt_q(.b))]
    EmptyInterval { a: Rational, b: Rational },

    #[error("{name} must be positive, got {}", fmt_q(.value))]
    NonPositive { name: &'static str, value: Rational },

    #[error("ternary index out of range: n = {n}, k = {k}")]
    IndexOutOfRange { n: u32, k: u64 },

    #[error("depth {depth} exceeds the exhaustive search bound {bound}")]
    DepthTooLarge { depth: u32, bound: u32 },

    #[error("insufficient intervals: round {round} found no admissible interval in gap [{}, {}]", fmt_q(&.gap.0), fmt_q(&.gap.1))]
    InsufficientIntervals { round: u32, gap: (Rational, Rational) },

    #[error("not inside fixed set: [{}, {}] is not contained in a component of fix(f)", fmt_q(&.window.0), fmt_q(&.window.1))]
    NotInsideFixedSet { window: (Rational, Rational) },

    #[error("no inward stub on arc {arc} at vertex {vertex}")]
    NoInwardStub { arc: usize, vertex: usize },

    #[error("no admissible delta for arc {arc}: {reason}")]
    NoAdmissibleDelta { arc: usize, reason: String },

    #[error("cover failure: {} uncovered sample point(s)", .0.len())]
    CoverFailure(Vec<String>),

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
