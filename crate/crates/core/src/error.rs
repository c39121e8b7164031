use std::fmt;

use thiserror::Error;

use crate::address::Address;

/// Position of a syntax problem inside a piece of text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("group closure exceeded the cap of {0} elements")]
    OrderExceedsCap(usize),

    #[error("group is not transitive")]
    NotTransitive,

    #[error("degree {degree} exceeds the symmetric-group search limit {limit}")]
    DegreeTooLarge { degree: usize, limit: usize },

    #[error("point {point} out of range for degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },

    #[error("invalid address {0}")]
    InvalidAddress(String),

    #[error("arity profiles or depths do not match")]
    ProfileMismatch,

    #[error("child {0} is not fixed by the root label")]
    ChildNotFixed(usize),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("leaves {0} and {1} are not prefix-free")]
    NotPrefixFree(Address, Address),

    #[error("leaf set is not complete: Kraft sum is {0}")]
    NotComplete(String),

    #[error("leaf {0} is not in the leaf set")]
    LeafAbsent(Address),

    #[error("malformed tree pair: {0}")]
    MalformedPair(String),

    #[error("germs have incompatible parameters")]
    IncompatibleParameters,

    #[error("level {level} is shallower than the required depth {required}")]
    LevelTooShallow { level: usize, required: usize },

    #[error("leaf set does not refine the domain: {0}")]
    NotARefinement(Address),

    #[error("local-action recipe is degenerate: {0}")]
    RecipeDegenerate(String),

    #[error("unknown group name {0:?}")]
    UnknownGroup(String),

    #[error("catalog error: {0}")]
    Catalog(String),
}

pub type Result<T> = std::result::Result<T, Error>;
