//! Permutations of `{0, .., n-1}` stored as image tables.
//!
//! Products use the right-action convention throughout the crate:
//! `p.then(&q)` (also `&p * &q`) applies `p` first and `q` second.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm {
            images: (0..degree).collect(),
        }
    }

    /// Builds a permutation from its image table, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::NotAPermutation(format!("{images:?}")));
            }
            seen[x] = true;
        }
        Ok(Perm { images })
    }

    /// Builds a permutation of the given degree from disjoint cycles.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (i, &p) in cycle.iter().enumerate() {
                if p >= degree {
                    return Err(Error::PointOutOfRange { point: p, degree });
                }
                if touched[p] {
                    return Err(Error::NotAPermutation(format!(
                        "point {p} occurs twice in cycles {cycles:?}"
                    )));
                }
                touched[p] = true;
                images[p] = cycle[(i + 1) % cycle.len()];
            }
        }
        Ok(Perm { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Right-action product: apply `self`, then `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            images: self.images.iter().map(|&x| other.images[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Perm { images: inv }
    }

    /// `self^-1 * other^-1 * self * other` in right-action notation.
    pub fn commutator(&self, other: &Perm) -> Perm {
        self.inverse()
            .then(&other.inverse())
            .then(self)
            .then(other)
    }

    /// Conjugate `by^-1 * self * by`; relabels points through `by`.
    pub fn conjugate_by(&self, by: &Perm) -> Perm {
        by.inverse().then(self).then(by)
    }

    pub fn pow(&self, mut e: usize) -> Perm {
        let mut base = self.clone();
        let mut acc = Perm::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        acc
    }

    pub fn order(&self) -> usize {
        self.cycles()
            .iter()
            .map(|c| c.len())
            .fold(1, lcm)
    }

    pub fn fixes(&self, point: usize) -> bool {
        self.images[point] == point
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, &x)| *i == x)
            .count()
    }

    /// Non-trivial cycles, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.cycles().iter().map(|c| c.len() - 1).sum::<usize>() % 2 == 0
    }

    /// 0 for even, 1 for odd.
    pub fn sign_bit(&self) -> u8 {
        if self.is_even() {
            0
        } else {
            1
        }
    }

    /// Cycle notation, `()` for the identity.
    pub fn to_cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect()
    }

    /// Parses cycle notation such as `(0 1 2)(3 4)` or `(0,1,2)`.
    pub fn parse_cycles(text: &str, degree: usize) -> Result<Perm> {
        let cycles = parse_cycle_list(text, 1, 1)?;
        Perm::from_cycles(degree, &cycles)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

impl TryFrom<Vec<usize>> for Perm {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Perm::from_images(v)
    }
}

impl From<Perm> for Vec<usize> {
    fn from(p: Perm) -> Vec<usize> {
        p.images
    }
}

impl Mul for &Perm {
    type Output = Perm;
    fn mul(self, rhs: &Perm) -> Perm {
        self.then(rhs)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Parses a sequence of cycles. `line`/`column` locate the first character
/// of `text` inside a larger document, for diagnostics.
pub fn parse_cycle_list(text: &str, line: usize, column: usize) -> Result<Vec<Vec<usize>>> {
    let err = |offset: usize, message: &str| Error::Parse {
        location: Location {
            line,
            column: column + offset,
        },
        message: message.to_string(),
    };
    let chars: Vec<char> = text.chars().collect();
    let mut cycles = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c != '(' {
            return Err(err(i, &format!("expected '(' but found {c:?}")));
        }
        let open = i;
        i += 1;
        let mut cycle = Vec::new();
        let mut closed = false;
        while i < chars.len() {
            let c = chars[i];
            if c == ')' {
                closed = true;
                i += 1;
                break;
            }
            if c.is_whitespace() || c == ',' {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v: usize = s.parse().map_err(|_| err(start, "number too large"))?;
                cycle.push(v);
                continue;
            }
            return Err(err(i, &format!("unexpected character {c:?} in cycle")));
        }
        if !closed {
            return Err(err(open, "unclosed cycle"));
        }
        let mut sorted = cycle.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != cycle.len() {
            return Err(err(open, "repeated point inside a cycle"));
        }
        if cycle.len() > 1 {
            cycles.push(cycle);
        }
    }
    Ok(cycles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_is_right_action() {
        let a = Perm::parse_cycles("(0 1)", 3).unwrap();
        let b = Perm::parse_cycles("(1 2)", 3).unwrap();
        // 0 -a-> 1 -b-> 2
        assert_eq!(a.then(&b).apply(0), 2);
        assert_eq!((&a * &b).to_cycle_string(), "(0 2 1)");
    }

    #[test]
    fn cycle_round_trip() {
        let p = Perm::parse_cycles("(0 3)(1 2 4)", 6).unwrap();
        assert_eq!(p.to_cycle_string(), "(0 3)(1 2 4)");
        assert_eq!(p.order(), 6);
        assert!(!p.is_even());
        assert_eq!(Perm::parse_cycles("()", 4).unwrap(), Perm::identity(4));
        assert_eq!(Perm::parse_cycles("(0,1,2)", 3).unwrap().apply(2), 0);
    }

    #[test]
    fn malformed_cycles_report_offsets() {
        match Perm::parse_cycles("(0 1", 3) {
            Err(Error::Parse { location, .. }) => assert_eq!(location.column, 1),
            other => panic!("unexpected {other:?}"),
        }
        match Perm::parse_cycles("(0 1)x", 3) {
            Err(Error::Parse { location, .. }) => assert_eq!(location.column, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Perm::parse_cycles("(0 0)", 3).is_err());
        assert!(Perm::parse_cycles("(0 1)(1 2)", 3).is_err());
        assert!(Perm::parse_cycles("(0 5)", 3).is_err());
    }

    #[test]
    fn images_are_validated() {
        assert!(Perm::from_images(vec![0, 0, 1]).is_err());
        assert!(Perm::from_images(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn inverse_and_commutator() {
        let a = Perm::parse_cycles("(0 1 2 3)", 4).unwrap();
        assert!(a.then(&a.inverse()).is_identity());
        assert!(a.commutator(&a).is_identity());
        assert_eq!(a.pow(4), Perm::identity(4));
    }
}
