//! Finite permutation groups given by generators.
//!
//! Everything here works from the breadth-first closure of the generators,
//! bounded by a caller-supplied cap. Target degrees are small (at most a
//! dozen points), where plain closure is fast and easy to audit.

mod blocks;
mod search;

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Perm;

pub use blocks::BlockSystem;
pub use search::{Equivalence, Normalizer};

/// Default closure cap.
pub const DEFAULT_CAP: usize = 2_000_000;

/// Default largest degree for brute-force searches over `Sym(degree)`.
pub const DEFAULT_SYM_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    name: Option<String>,
}

/// The enumerated elements of a group, sorted, with O(1) membership.
#[derive(Debug, Clone)]
pub struct ElementSet {
    degree: usize,
    list: Vec<Perm>,
    set: HashSet<Perm>,
}

impl ElementSet {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.set.contains(p)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Perm> {
        self.list.iter()
    }

    pub fn as_slice(&self) -> &[Perm] {
        &self.list
    }

    fn from_set(degree: usize, set: HashSet<Perm>) -> Self {
        let mut list: Vec<Perm> = set.iter().cloned().collect();
        list.sort();
        ElementSet { degree, list, set }
    }
}

/// Stabilizer of a point, in two views: acting on all `degree` points, and
/// acting on the remaining `degree - 1` points after deleting `point` and
/// closing the gap (`relabel[i]` is the original name of new point `i`).
#[derive(Debug, Clone)]
pub struct PointStabilizer {
    pub point: usize,
    pub full: PermGroup,
    pub restricted: PermGroup,
    pub relabel: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureFlags {
    pub order: usize,
    pub derived_order: usize,
    pub is_perfect: bool,
    pub in_alternating: bool,
    /// No point is fixed by the whole group.
    pub no_global_fixed_point: bool,
    /// Every non-identity element moves every point.
    pub semiregular: bool,
}

impl PermGroup {
    /// A group of the given degree. An empty generator list denotes the
    /// trivial group and is stored as the single identity generator.
    pub fn new(degree: usize, generators: Vec<Perm>) -> Result<Self> {
        for g in &generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
        }
        let generators = if generators.is_empty() {
            vec![Perm::identity(degree)]
        } else {
            generators
        };
        Ok(PermGroup {
            degree,
            generators,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Generators given in cycle notation.
    pub fn from_cycle_strings(degree: usize, gens: &[&str]) -> Result<Self> {
        let perms = gens
            .iter()
            .map(|g| Perm::parse_cycles(g, degree))
            .collect::<Result<Vec<_>>>()?;
        PermGroup::new(degree, perms)
    }

    pub fn trivial(degree: usize) -> Self {
        PermGroup::new(degree, Vec::new()).expect("identity has the right degree")
    }

    pub fn symmetric(n: usize) -> Self {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Perm::from_cycles(n, &[vec![0, 1]]).unwrap());
        }
        if n >= 3 {
            gens.push(Perm::from_cycles(n, &[(0..n).collect()]).unwrap());
        }
        PermGroup::new(n, gens).unwrap().with_name(format!("Sym({n})"))
    }

    pub fn alternating(n: usize) -> Self {
        // 3-cycles (0 1 i) generate Alt(n).
        let gens = (2..n)
            .map(|i| Perm::from_cycles(n, &[vec![0, 1, i]]).unwrap())
            .collect();
        PermGroup::new(n, gens).unwrap().with_name(format!("Alt({n})"))
    }

    pub fn cyclic(n: usize) -> Self {
        let gens = if n >= 2 {
            vec![Perm::from_cycles(n, &[(0..n).collect()]).unwrap()]
        } else {
            Vec::new()
        };
        PermGroup::new(n, gens).unwrap().with_name(format!("C{n}"))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn display_name(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => {
                let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
                format!("<{}>", gens.join(", "))
            }
        }
    }

    /// Breadth-first closure of the generators.
    pub fn enumerate(&self, cap: usize) -> Result<ElementSet> {
        let set = closure(self.degree, &self.generators, cap)?;
        Ok(ElementSet::from_set(self.degree, set))
    }

    pub fn order(&self, cap: usize) -> Result<usize> {
        Ok(closure(self.degree, &self.generators, cap)?.len())
    }

    /// Orbits as sorted cells, ordered by their smallest point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.degree;
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < orbit.len() {
                let x = orbit[i];
                for g in &self.generators {
                    let y = g.apply(x);
                    if !seen[y] {
                        seen[y] = true;
                        orbit.push(y);
                    }
                }
                i += 1;
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.degree > 0 && self.orbits().len() == 1
    }

    /// Largest `t` such that the group is transitive on ordered `t`-tuples of
    /// distinct points; 0 when the group is intransitive.
    pub fn transitivity_degree(&self, cap: usize) -> Result<usize> {
        if !self.is_transitive() {
            return Ok(0);
        }
        let elements = self.enumerate(cap)?;
        let n = self.degree;
        let mut needed: usize = 1;
        for t in 1..=n {
            needed *= n - t + 1;
            if elements.len() < needed {
                return Ok(t - 1);
            }
            let images: HashSet<Vec<usize>> = elements
                .iter()
                .map(|g| (0..t).map(|i| g.apply(i)).collect())
                .collect();
            if images.len() != needed {
                return Ok(t - 1);
            }
        }
        Ok(n)
    }

    pub fn point_stabilizer(&self, point: usize, cap: usize) -> Result<PointStabilizer> {
        if point >= self.degree {
            return Err(Error::PointOutOfRange {
                point,
                degree: self.degree,
            });
        }
        let elements = self.enumerate(cap)?;
        let fixing: Vec<Perm> = elements.iter().filter(|g| g.fixes(point)).cloned().collect();
        let gens = generating_subset(self.degree, &fixing, cap)?;
        let relabel: Vec<usize> = (0..self.degree).filter(|&x| x != point).collect();
        let restricted_gens = gens
            .iter()
            .map(|g| restrict_perm(g, point))
            .collect::<Vec<_>>();
        let base = self.display_name();
        let full = PermGroup::new(self.degree, gens)?.with_name(format!("Stab_{base}({point})"));
        let restricted = PermGroup::new(self.degree - 1, restricted_gens)?
            .with_name(format!("Stab_{base}({point}) on {} points", self.degree - 1));
        Ok(PointStabilizer {
            point,
            full,
            restricted,
            relabel,
        })
    }

    /// True iff the point stabilizers together generate the group.
    pub fn is_generated_by_point_stabilizers(&self, cap: usize) -> Result<bool> {
        if !self.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let elements = self.enumerate(cap)?;
        let fixing: Vec<Perm> = elements
            .iter()
            .filter(|g| g.fixed_points() > 0)
            .cloned()
            .collect();
        let generated = closure(self.degree, &fixing, cap)?;
        Ok(generated.len() == elements.len())
    }

    /// Derived subgroup as the normal closure of generator commutators.
    pub fn derived_subgroup(&self, cap: usize) -> Result<PermGroup> {
        let mut gens: Vec<Perm> = Vec::new();
        for a in &self.generators {
            for b in &self.generators {
                let c = a.commutator(b);
                if !c.is_identity() && !gens.contains(&c) {
                    gens.push(c);
                }
            }
        }
        let mut current = closure(self.degree, &gens, cap)?;
        loop {
            let mut added = false;
            let snapshot = gens.clone();
            for h in &snapshot {
                for g in &self.generators {
                    let c = h.conjugate_by(g);
                    if !current.contains(&c) {
                        gens.push(c);
                        current = closure(self.degree, &gens, cap)?;
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        let gens = generating_subset(self.degree, &sorted(current), cap)?;
        Ok(PermGroup::new(self.degree, gens)?.with_name(format!("[{0},{0}]", self.display_name())))
    }

    pub fn structure_flags(&self, cap: usize) -> Result<StructureFlags> {
        let elements = self.enumerate(cap)?;
        let derived_order = self.derived_subgroup(cap)?.order(cap)?;
        let no_global_fixed_point = (0..self.degree)
            .all(|p| self.generators.iter().any(|g| !g.fixes(p)));
        let semiregular = elements
            .iter()
            .all(|g| g.is_identity() || g.fixed_points() == 0);
        Ok(StructureFlags {
            order: elements.len(),
            derived_order,
            is_perfect: derived_order == elements.len(),
            in_alternating: self.generators.iter().all(|g| g.is_even()),
            no_global_fixed_point,
            semiregular,
        })
    }

    /// Minimal non-trivial block systems; see [`BlockSystem`].
    pub fn block_systems(&self) -> Result<Vec<BlockSystem>> {
        blocks::minimal_block_systems(self)
    }

    pub fn is_primitive(&self) -> Result<bool> {
        Ok(self.block_systems()?.is_empty())
    }

    /// All block systems, trivial ones included, sorted by block size.
    pub fn all_block_systems(&self) -> Result<Vec<BlockSystem>> {
        blocks::all_block_systems(self)
    }

    /// Non-trivial block systems that are maximal under refinement.
    pub fn maximal_blocks(&self) -> Result<Vec<BlockSystem>> {
        blocks::maximal_block_systems(self)
    }

    /// True iff the setwise stabilizer of every cell acts regularly on it.
    pub fn is_regular_on_block(&self, system: &BlockSystem, cap: usize) -> Result<bool> {
        blocks::is_regular_on_block(self, system, cap)
    }

    pub fn normalizer_in_sym(&self, max_degree: usize, cap: usize) -> Result<Normalizer> {
        search::normalizer_in_sym(self, max_degree, cap)
    }

    pub fn permutation_equivalence(&self, other: &PermGroup, cap: usize) -> Result<Option<Equivalence>> {
        search::permutation_equivalence(self, other, cap)
    }

    /// Checks that conjugating by `bijection` carries this group onto `other`.
    pub fn verify_equivalence(&self, other: &PermGroup, bijection: &Perm, cap: usize) -> Result<bool> {
        search::verify_equivalence(self, other, bijection, cap)
    }

    pub fn is_abstractly_isomorphic(&self, other: &PermGroup, cap: usize) -> Result<bool> {
        Ok(search::abstract_isomorphism(self, other, cap)?.is_some())
    }

    /// Generator images of an abstract isomorphism onto `other`, if any.
    pub fn abstract_isomorphism(&self, other: &PermGroup, cap: usize) -> Result<Option<Vec<Perm>>> {
        search::abstract_isomorphism(self, other, cap)
    }
}

/// Deletes a fixed point and closes the gap.
fn restrict_perm(g: &Perm, point: usize) -> Perm {
    let squash = |x: usize| if x > point { x - 1 } else { x };
    let images = (0..g.degree())
        .filter(|&x| x != point)
        .map(|x| squash(g.apply(x)))
        .collect();
    Perm::from_images(images).expect("restriction of a permutation fixing the point")
}

fn sorted(set: HashSet<Perm>) -> Vec<Perm> {
    let mut v: Vec<Perm> = set.into_iter().collect();
    v.sort();
    v
}

/// Closure of `gens` under multiplication, identity included.
pub(crate) fn closure(degree: usize, gens: &[Perm], cap: usize) -> Result<HashSet<Perm>> {
    let id = Perm::identity(degree);
    let gens: Vec<&Perm> = gens.iter().filter(|g| !g.is_identity()).collect();
    let mut set = HashSet::new();
    set.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = x.then(g);
            if !set.contains(&y) {
                if set.len() >= cap {
                    return Err(Error::OrderExceedsCap(cap));
                }
                set.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(set)
}

/// Greedy generating set: walks `elements` in order and keeps each element
/// not already in the closure of those kept so far.
pub fn generating_subset(degree: usize, elements: &[Perm], cap: usize) -> Result<Vec<Perm>> {
    let mut gens: Vec<Perm> = Vec::new();
    let mut current = closure(degree, &gens, cap)?;
    for e in elements {
        if !current.contains(e) {
            gens.push(e.clone());
            current = closure(degree, &gens, cap)?;
        }
    }
    Ok(gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(degree: usize, gens: &[&str]) -> PermGroup {
        PermGroup::from_cycle_strings(degree, gens).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(PermGroup::trivial(3).order(10).unwrap(), 1);
        assert_eq!(g(3, &["(0 1 2)", "(0 1)"]).order(10).unwrap(), 6);
        assert_eq!(
            g(3, &["(0 1 2)", "(0 1)"]).order(5),
            Err(Error::OrderExceedsCap(5))
        );
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(PermGroup::trivial(3).orbits(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(g(3, &["(0 1)"]).orbits(), vec![vec![0, 1], vec![2]]);
        assert_eq!(g(4, &["(0 1 2 3)"]).orbits(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn transitivity_examples() {
        assert_eq!(g(3, &["(0 1)"]).transitivity_degree(100).unwrap(), 0);
        assert_eq!(PermGroup::symmetric(4).transitivity_degree(100).unwrap(), 4);
        assert_eq!(PermGroup::alternating(5).transitivity_degree(100).unwrap(), 3);
        assert_eq!(PermGroup::cyclic(5).transitivity_degree(100).unwrap(), 1);
    }

    #[test]
    fn stabilizer_examples() {
        let s = PermGroup::symmetric(3).point_stabilizer(2, 100).unwrap();
        assert_eq!(s.full.order(100).unwrap(), 2);
        assert_eq!(s.restricted.degree(), 2);
        assert_eq!(s.restricted.order(100).unwrap(), 2);
        assert_eq!(s.relabel, vec![0, 1]);
        let c = PermGroup::cyclic(5).point_stabilizer(0, 100).unwrap();
        assert_eq!(c.full.order(100).unwrap(), 1);
    }

    #[test]
    fn generated_by_point_stabilizers() {
        assert!(PermGroup::symmetric(3).is_generated_by_point_stabilizers(100).unwrap());
        assert!(!PermGroup::cyclic(3).is_generated_by_point_stabilizers(100).unwrap());
        for n in 3..=4 {
            assert!(PermGroup::symmetric(n).is_generated_by_point_stabilizers(1000).unwrap());
        }
        assert_eq!(
            g(3, &["(0 1)"]).is_generated_by_point_stabilizers(100),
            Err(Error::NotTransitive)
        );
    }

    #[test]
    fn structure_flag_examples() {
        let a5 = PermGroup::alternating(5).structure_flags(1000).unwrap();
        assert!(a5.is_perfect && a5.in_alternating);
        assert_eq!(a5.order, 60);
        let s3 = PermGroup::symmetric(3).structure_flags(1000).unwrap();
        assert!(!s3.is_perfect && !s3.in_alternating);
        assert_eq!(s3.derived_order, 3);
        let c3 = PermGroup::cyclic(3).structure_flags(100).unwrap();
        assert!(c3.semiregular && c3.no_global_fixed_point);
        assert!(!s3.semiregular);
    }

    #[test]
    fn generating_subset_regenerates() {
        let s4 = PermGroup::symmetric(4).enumerate(100).unwrap();
        let gens = generating_subset(4, s4.as_slice(), 100).unwrap();
        assert!(gens.len() <= 4);
        assert_eq!(closure(4, &gens, 100).unwrap().len(), 24);
    }
}
