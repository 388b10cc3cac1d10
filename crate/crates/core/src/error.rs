use std::fmt;

use thiserror::Error;

use crate::model::MemberId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A syntax or validation error in one of the line-oriented file formats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

fn fmt_members(members: &[MemberId]) -> String {
    let ids: Vec<&str> = members.iter().map(|m| m.as_str()).collect();
    format!("{{{}}}", ids.join(","))
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid identifier {0:?}: must be non-empty without whitespace or '#'")]
    InvalidId(String),
    #[error("arithmetic overflow while evaluating cost")]
    Overflow,
    #[error("hierarchy is not a tree: {0}")]
    NotATree(String),
    #[error("unknown member {0}")]
    UnknownMember(MemberId),
    #[error("{0} is not a leaf of the hierarchy")]
    NotALeaf(MemberId),
    #[error("multicast cost undefined for subset {}", fmt_members(.0))]
    OracleUndefined(Vec<MemberId>),
    #[error("combine needs at least one part")]
    EmptyCombine,
    #[error("combined parts share member {0}")]
    OverlappingMembers(MemberId),
    #[error("instance has {n} members, brute force is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("operation requires a uniform multicast oracle")]
    NonUniformOracle,
    #[error("member {0} has zero weight")]
    ZeroWeight(MemberId),
    #[error("empty member set")]
    EmptyMembers,
    #[error("routing network is disconnected")]
    Disconnected,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
}
