//! Higman–Thompson elements as reduced tree-pair diagrams.
//!
//! Trees are `T_{d,k}`: the root has `k` children and every other vertex
//! `d`. A leaf set is a complete prefix code, kept in planar order. A tree
//! pair `(dom, cod, σ)` maps dom leaf `i` to cod leaf `σ[i]`, acting on
//! deeper addresses by keeping the suffix.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::address::Address;
use crate::error::{Error, Result};
use crate::perm::Perm;

/// Arity of a vertex at `depth` in `T_{d,k}`.
pub fn arity(k: usize, d: usize, depth: usize) -> usize {
    if depth == 0 {
        k
    } else {
        d
    }
}

/// Kraft weight of a vertex: 1 at the root, `1/(k·d^(L−1))` at length `L`.
pub fn weight(k: usize, d: usize, a: &Address) -> BigRational {
    if a.is_empty() {
        return BigRational::one();
    }
    let denom = BigInt::from(k) * BigInt::from(d).pow((a.len() - 1) as u32);
    BigRational::new(BigInt::one(), denom)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LeafSet {
    pub k: usize,
    pub d: usize,
    pub leaves: Vec<Address>,
}

impl LeafSet {
    /// Sorts the leaves and checks that they form a complete prefix code.
    pub fn validate(k: usize, d: usize, mut leaves: Vec<Address>) -> Result<LeafSet> {
        if k == 0 || d < 2 {
            return Err(Error::IncompatibleParameters);
        }
        for a in &leaves {
            if !a.fits(k, d) {
                return Err(Error::InvalidAddress(a.to_string()));
            }
        }
        leaves.sort();
        for w in leaves.windows(2) {
            if w[0].is_prefix_of(&w[1]) {
                return Err(Error::NotPrefixFree(w[0].clone(), w[1].clone()));
            }
        }
        let sum = leaves
            .iter()
            .fold(BigRational::zero(), |acc, a| acc + weight(k, d, a));
        if !sum.is_one() {
            return Err(Error::NotComplete(sum.to_string()));
        }
        Ok(LeafSet { k, d, leaves })
    }

    pub fn root(k: usize, d: usize) -> LeafSet {
        LeafSet {
            k,
            d,
            leaves: vec![Address::root()],
        }
    }

    /// All addresses of length `n`.
    pub fn uniform(k: usize, d: usize, n: usize) -> LeafSet {
        LeafSet {
            k,
            d,
            leaves: Address::level(k, d, n),
        }
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn position(&self, a: &Address) -> Option<usize> {
        self.leaves.binary_search(a).ok()
    }

    /// Index of the leaf that is a prefix of `a`, if any.
    pub fn leaf_above(&self, a: &Address) -> Option<usize> {
        let i = match self.leaves.binary_search(a) {
            Ok(i) => return Some(i),
            Err(i) => i,
        };
        // A prefix sorts before `a`, and nothing sorts between them that is
        // not also an extension of the prefix.
        (i > 0 && self.leaves[i - 1].is_prefix_of(a)).then(|| i - 1)
    }

    pub fn arity_of(&self, a: &Address) -> usize {
        arity(self.k, self.d, a.len())
    }

    /// Replaces `leaf` by its children.
    pub fn refine_leaf(&self, leaf: &Address) -> Result<LeafSet> {
        let i = self.position(leaf).ok_or_else(|| Error::LeafAbsent(leaf.clone()))?;
        let mut leaves = self.leaves[..i].to_vec();
        leaves.extend((0..self.arity_of(leaf)).map(|c| leaf.child(c)));
        leaves.extend_from_slice(&self.leaves[i + 1..]);
        Ok(LeafSet {
            k: self.k,
            d: self.d,
            leaves,
        })
    }

    pub fn kraft_sum(&self) -> BigRational {
        self.leaves
            .iter()
            .fold(BigRational::zero(), |acc, a| acc + weight(self.k, self.d, a))
    }

    pub fn max_len(&self) -> usize {
        self.leaves.iter().map(|a| a.len()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Even,
    Odd,
}

impl Sign {
    pub fn from_bit(b: u8) -> Sign {
        if b == 0 {
            Sign::Even
        } else {
            Sign::Odd
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Sign::Even => 0,
            Sign::Odd => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Parity {
    pub sign: Sign,
    /// Set for even `d`, where refining a leaf can change the sign.
    pub representative_dependent: bool,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePair {
    dom: LeafSet,
    cod: LeafSet,
    sigma: Vec<usize>,
}

/// A collapsible sibling family, named by its first dom index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Collapse {
    pub first: usize,
    pub arity: usize,
}

impl TreePair {
    /// Checks shapes; does not reduce.
    pub fn new(dom: LeafSet, cod: LeafSet, sigma: Vec<usize>) -> Result<TreePair> {
        if dom.k != cod.k || dom.d != cod.d {
            return Err(Error::IncompatibleParameters);
        }
        if dom.len() != cod.len() || sigma.len() != dom.len() {
            return Err(Error::MalformedPair(format!(
                "{} dom leaves, {} cod leaves, {} images",
                dom.len(),
                cod.len(),
                sigma.len()
            )));
        }
        Perm::from_images(sigma.clone()).map_err(|_| Error::MalformedPair(format!("{sigma:?} is not a bijection")))?;
        Ok(TreePair { dom, cod, sigma })
    }

    /// Builds a pair from leaf-to-leaf assignments; does not reduce.
    pub fn from_pairs(k: usize, d: usize, pairs: Vec<(Address, Address)>) -> Result<TreePair> {
        let dom = LeafSet::validate(k, d, pairs.iter().map(|(u, _)| u.clone()).collect())?;
        let cod = LeafSet::validate(k, d, pairs.iter().map(|(_, v)| v.clone()).collect())?;
        let map: BTreeMap<&Address, &Address> = pairs.iter().map(|(u, v)| (u, v)).collect();
        if map.len() != pairs.len() {
            return Err(Error::MalformedPair("repeated dom leaf".into()));
        }
        let sigma = dom
            .leaves
            .iter()
            .map(|u| cod.position(map[u]).expect("cod leaf present"))
            .collect();
        TreePair::new(dom, cod, sigma)
    }

    pub fn identity(k: usize, d: usize) -> TreePair {
        TreePair {
            dom: LeafSet::root(k, d),
            cod: LeafSet::root(k, d),
            sigma: vec![0],
        }
    }

    /// The order-preserving pair between two leaf sets of equal size.
    pub fn order_preserving(dom: LeafSet, cod: LeafSet) -> Result<TreePair> {
        let n = dom.len();
        TreePair::new(dom, cod, (0..n).collect())
    }

    pub fn k(&self) -> usize {
        self.dom.k
    }

    pub fn d(&self) -> usize {
        self.dom.d
    }

    pub fn dom(&self) -> &LeafSet {
        &self.dom
    }

    pub fn cod(&self) -> &LeafSet {
        &self.cod
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// `(dom leaf, cod leaf)` in dom order.
    pub fn pairs(&self) -> Vec<(Address, Address)> {
        self.dom
            .leaves
            .iter()
            .zip(&self.sigma)
            .map(|(u, &j)| (u.clone(), self.cod.leaves[j].clone()))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.dom.leaves.len() == 1 && self.dom.leaves[0].is_empty()
    }

    /// Image of an address lying at or below some dom leaf.
    pub fn apply(&self, a: &Address) -> Option<Address> {
        let i = self.dom.leaf_above(a)?;
        let tail = self.dom.leaves[i].suffix_of(a).expect("prefix");
        Some(self.cod.leaves[self.sigma[i]].concat(tail))
    }

    /// Equivalent pair with dom leaf `i` replaced by its children.
    pub fn refine_dom_leaf(&self, i: usize) -> Result<TreePair> {
        let u = self.dom.leaves.get(i).ok_or(Error::MalformedPair(format!("no dom leaf {i}")))?;
        let v = &self.cod.leaves[self.sigma[i]];
        let a = self.dom.arity_of(u);
        if a != self.cod.arity_of(v) {
            return Err(Error::MalformedPair(format!("cannot refine {u:?} against {v:?}")));
        }
        let mut pairs = self.pairs();
        pairs.remove(i);
        pairs.extend((0..a).map(|c| (u.child(c), v.child(c))));
        TreePair::from_pairs(self.k(), self.d(), pairs)
    }

    /// Refines every dom leaf shorter than `n` until dom is all of level `n`.
    pub fn refine_dom_to_level(&self, n: usize) -> Result<TreePair> {
        let mut t = self.clone();
        while let Some(i) = t.dom.leaves.iter().position(|u| u.len() < n) {
            t = t.refine_dom_leaf(i)?;
        }
        Ok(t)
    }

    /// Refines so that the cod leaf set is all of level `n`.
    pub fn refine_cod_to_level(&self, n: usize) -> Result<TreePair> {
        Ok(self.inverse().refine_dom_to_level(n)?.inverse())
    }

    /// Sibling families that may be collapsed, in dom order.
    pub fn collapsible(&self) -> Vec<Collapse> {
        let mut out = Vec::new();
        let n = self.len();
        for i in 0..n {
            let u = &self.dom.leaves[i];
            let Some(p) = u.parent() else { continue };
            if u.last() != Some(0) {
                continue;
            }
            let a = self.dom.arity_of(&p);
            if i + a > n || (0..a).any(|c| self.dom.leaves[i + c] != p.child(c)) {
                continue;
            }
            let j = self.sigma[i];
            let v = &self.cod.leaves[j];
            let Some(q) = v.parent() else { continue };
            if v.last() != Some(0) || self.cod.arity_of(&q) != a || j + a > n {
                continue;
            }
            if (0..a).all(|c| self.sigma[i + c] == j + c && self.cod.leaves[j + c] == q.child(c)) {
                out.push(Collapse { first: i, arity: a });
            }
        }
        out
    }

    fn collapse(&self, c: Collapse) -> TreePair {
        let p = self.dom.leaves[c.first].parent().expect("family parent");
        let q = self.cod.leaves[self.sigma[c.first]].parent().expect("family parent");
        let mut pairs: Vec<(Address, Address)> = self
            .pairs()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i < c.first || *i >= c.first + c.arity)
            .map(|(_, x)| x)
            .collect();
        pairs.push((p, q));
        TreePair::from_pairs(self.k(), self.d(), pairs).expect("collapse keeps a valid pair")
    }

    /// Collapses families until none remain, choosing among the available
    /// ones with `choose` (given their count, returns an index).
    pub fn reduce_with(&self, mut choose: impl FnMut(usize) -> usize) -> TreePair {
        let mut t = self.clone();
        loop {
            let options = t.collapsible();
            if options.is_empty() {
                return t;
            }
            let pick = choose(options.len()).min(options.len() - 1);
            t = t.collapse(options[pick]);
        }
    }

    /// Normal form; collapses the leftmost family first.
    pub fn reduce(&self) -> TreePair {
        self.reduce_with(|_| 0)
    }

    pub fn is_reduced(&self) -> bool {
        self.collapsible().is_empty()
    }

    pub fn inverse(&self) -> TreePair {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.sigma.iter().enumerate() {
            inv[j] = i;
        }
        TreePair {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            sigma: inv,
        }
    }

    /// Right-action product, apply `self` then `other`, reduced.
    pub fn compose(&self, other: &TreePair) -> Result<TreePair> {
        Ok(self.compose_unreduced(other)?.reduce())
    }

    /// Product on the coarsest common refinement of `cod(self)` and
    /// `dom(other)`, before reduction.
    pub fn compose_unreduced(&self, other: &TreePair) -> Result<TreePair> {
        if self.k() != other.k() || self.d() != other.d() {
            return Err(Error::IncompatibleParameters);
        }
        let (k, d) = (self.k(), self.d());
        // s: cod leaf -> dom leaf; t: dom leaf -> cod leaf.
        let mut s: BTreeMap<Address, Address> = self.pairs().into_iter().map(|(u, v)| (v, u)).collect();
        let mut t: BTreeMap<Address, Address> = other.pairs().into_iter().collect();
        loop {
            let mismatch = s.keys().find(|v| !t.contains_key(*v)).cloned();
            let Some(v) = mismatch else { break };
            let above = t.keys().find(|u| u.is_strict_prefix_of(&v)).cloned();
            match above {
                Some(u) => {
                    let w = t.remove(&u).expect("present");
                    for c in 0..arity(k, d, u.len()) {
                        t.insert(u.child(c), w.child(c));
                    }
                }
                None => {
                    let x = s.remove(&v).expect("present");
                    for c in 0..arity(k, d, v.len()) {
                        s.insert(v.child(c), x.child(c));
                    }
                }
            }
        }
        let pairs = s.into_iter().map(|(mid, x)| (x, t[&mid].clone())).collect();
        TreePair::from_pairs(k, d, pairs)
    }

    pub fn pow(&self, e: usize) -> Result<TreePair> {
        let mut acc = TreePair::identity(self.k(), self.d());
        for _ in 0..e {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }

    /// Membership in `F_{d,k}`: `σ` matches leaves in planar order.
    pub fn is_order_preserving(&self) -> bool {
        self.sigma.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Sign of `σ` read in planar order on both sides, for this
    /// representative.
    pub fn sign(&self) -> Sign {
        Sign::from_bit(Perm::from_images(self.sigma.clone()).expect("bijection").sign_bit())
    }

    pub fn parity(&self) -> Parity {
        Parity {
            sign: self.sign(),
            representative_dependent: self.d().is_multiple_of(2),
        }
    }

    /// Every pair obtained by refining one dom leaf.
    pub fn single_refinements(&self) -> Vec<TreePair> {
        (0..self.len()).filter_map(|i| self.refine_dom_leaf(i).ok()).collect()
    }

    /// A representative of the same element whose sign differs, found by
    /// breadth-first search over at most `max_steps` leaf refinements.
    /// Exists for even `d` exactly when `σ` is not the identity index map.
    pub fn sign_flip_witness(&self, max_steps: usize) -> Option<TreePair> {
        let base = self.sign();
        let mut queue = VecDeque::from([(self.clone(), 0usize)]);
        let mut seen = HashSet::from([self.clone()]);
        while let Some((t, steps)) = queue.pop_front() {
            if t.sign() != base {
                return Some(t);
            }
            if steps == max_steps {
                continue;
            }
            for r in t.single_refinements() {
                if seen.insert(r.clone()) {
                    queue.push_back((r, steps + 1));
                }
            }
        }
        None
    }

    /// Images of every address of length `level`; each must lie at or below
    /// a dom leaf.
    pub fn boundary_map(&self, level: usize) -> Option<Vec<Address>> {
        Address::level(self.k(), self.d(), level)
            .iter()
            .map(|a| self.apply(a))
            .collect()
    }

    /// Three lines: dom leaves, cod leaves, `σ`. The root is written `-`.
    pub fn to_text(&self) -> String {
        let leaves = |l: &LeafSet| {
            l.leaves
                .iter()
                .map(|a| if a.is_empty() { "-".to_string() } else { a.to_string() })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let sigma: Vec<String> = self.sigma.iter().map(|j| j.to_string()).collect();
        format!("{}\n{}\n{}\n", leaves(&self.dom), leaves(&self.cod), sigma.join(" "))
    }

    /// Parses [`TreePair::to_text`] output. Leaves may be listed in any
    /// order; `σ` refers to the listed order. The result is not reduced.
    pub fn from_text(k: usize, d: usize, text: &str) -> Result<TreePair> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() != 3 {
            return Err(Error::MalformedPair(format!("expected 3 lines, found {}", lines.len())));
        }
        let parse_leaves = |line: &str| -> Result<Vec<Address>> {
            line.split_whitespace().map(|s| s.parse::<Address>()).collect()
        };
        let dom = parse_leaves(lines[0])?;
        let cod = parse_leaves(lines[1])?;
        let sigma: Vec<usize> = lines[2]
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|_| Error::MalformedPair(format!("bad index {s:?}"))))
            .collect::<Result<_>>()?;
        if sigma.len() != dom.len() || dom.len() != cod.len() {
            return Err(Error::MalformedPair("line lengths differ".into()));
        }
        let pairs = dom
            .iter()
            .zip(&sigma)
            .map(|(u, &j)| {
                cod.get(j)
                    .map(|v| (u.clone(), v.clone()))
                    .ok_or_else(|| Error::MalformedPair(format!("index {j} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        let distinct: BTreeSet<usize> = sigma.iter().copied().collect();
        if distinct.len() != sigma.len() {
            return Err(Error::MalformedPair("σ is not a bijection".into()));
        }
        TreePair::from_pairs(k, d, pairs)
    }
}

impl fmt::Debug for TreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self.pairs().iter().map(|(u, v)| format!("{u:?}->{v:?}")).collect();
        write!(f, "TreePair[{},{}; {}]", self.k(), self.d(), pairs.join(" "))
    }
}

impl fmt::Display for TreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Serialize for TreePair {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            k: usize,
            d: usize,
            dom: &'a [Address],
            cod: &'a [Address],
            sigma: &'a [usize],
        }
        Repr {
            k: self.k(),
            d: self.d(),
            dom: &self.dom.leaves,
            cod: &self.cod.leaves,
            sigma: &self.sigma,
        }
        .serialize(serializer)
    }
}
