//! Vertex addresses in rooted trees.
//!
//! The root is the empty address; children of a vertex are numbered from 0.
//! Addresses print as dot-joined decimals (`2.0.1`), the root as the empty
//! string. Lexicographic order on addresses is the planar (left-to-right)
//! order of the tree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address(pub Vec<usize>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn child(&self, c: usize) -> Address {
        let mut v = self.0.clone();
        v.push(c);
        Address(v)
    }

    pub fn parent(&self) -> Option<Address> {
        if self.0.is_empty() {
            None
        } else {
            Some(Address(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_prefix_of(&self, other: &Address) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn is_strict_prefix_of(&self, other: &Address) -> bool {
        other.0.len() > self.0.len() && self.is_prefix_of(other)
    }

    pub fn concat(&self, tail: &[usize]) -> Address {
        let mut v = self.0.clone();
        v.extend_from_slice(tail);
        Address(v)
    }

    /// Symbols of `other` after the prefix `self`.
    pub fn suffix_of<'a>(&self, other: &'a Address) -> Option<&'a [usize]> {
        if self.is_prefix_of(other) {
            Some(&other.0[self.0.len()..])
        } else {
            None
        }
    }

    /// All addresses of length `level` in a tree with root arity `root_arity`
    /// and arity `deep_arity` below, in planar order.
    pub fn level(root_arity: usize, deep_arity: usize, level: usize) -> Vec<Address> {
        let mut out = vec![Address::root()];
        for l in 0..level {
            let arity = if l == 0 { root_arity } else { deep_arity };
            out = out
                .iter()
                .flat_map(|a| (0..arity).map(move |c| a.child(c)))
                .collect();
        }
        out
    }

    /// Mixed-radix index of this address among its level, planar order.
    pub fn level_index(&self, root_arity: usize, deep_arity: usize) -> usize {
        self.0.iter().enumerate().fold(0, |acc, (l, &s)| {
            let arity = if l == 0 { root_arity } else { deep_arity };
            acc * arity + s
        })
    }

    /// Checks that every symbol is within the arity of its level.
    pub fn fits(&self, root_arity: usize, deep_arity: usize) -> bool {
        self.0.iter().enumerate().all(|(l, &s)| {
            let arity = if l == 0 { root_arity } else { deep_arity };
            s < arity
        })
    }
}

impl From<Vec<usize>> for Address {
    fn from(v: Vec<usize>) -> Self {
        Address(v)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "<root>")
        } else {
            write!(f, "{self}")
        }
    }
}

impl FromStr for Address {
    type Err = Error;

    /// Accepts `""` or `"-"` for the root.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Ok(Address::root());
        }
        s.split('.')
            .map(|part| {
                part.parse::<usize>()
                    .map_err(|_| Error::InvalidAddress(s.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Address)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
