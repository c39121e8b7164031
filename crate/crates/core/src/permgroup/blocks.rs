use std::collections::BTreeSet;

use serde::Serialize;

use super::PermGroup;
use crate::error::{Error, Result};

/// A partition of the points into equal-size cells permuted by the group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BlockSystem {
    pub degree: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl BlockSystem {
    pub fn block_size(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.len())
    }

    pub fn is_trivial(&self) -> bool {
        let s = self.block_size();
        s <= 1 || s == self.degree
    }

    pub fn block_of(&self, point: usize) -> &[usize] {
        self.blocks
            .iter()
            .find(|b| b.contains(&point))
            .expect("cells cover every point")
    }

    /// True iff every cell of `self` lies inside a cell of `other`.
    pub fn refines(&self, other: &BlockSystem) -> bool {
        self.blocks
            .iter()
            .all(|b| other.blocks.iter().any(|c| b.iter().all(|x| c.contains(x))))
    }

    /// Checks the partition and invariance conditions against `group`.
    pub fn is_valid_for(&self, group: &PermGroup) -> bool {
        let mut seen = vec![false; self.degree];
        let size = self.block_size();
        for b in &self.blocks {
            if b.len() != size {
                return false;
            }
            for &x in b {
                if x >= self.degree || seen[x] {
                    return false;
                }
                seen[x] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return false;
        }
        group.generators().iter().all(|g| {
            self.blocks.iter().all(|b| {
                let image: BTreeSet<usize> = b.iter().map(|&x| g.apply(x)).collect();
                self.blocks
                    .iter()
                    .any(|c| c.len() == image.len() && c.iter().all(|x| image.contains(x)))
            })
        })
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut y = x;
        while self.parent[y] != root {
            let next = self.parent[y];
            self.parent[y] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Finest block system in which all `seed` points share a cell.
pub(super) fn minimal_block_system(group: &PermGroup, seed: &[usize]) -> BlockSystem {
    let n = group.degree();
    let mut uf = UnionFind::new(n);
    let mut queue = Vec::new();
    if let Some((&first, rest)) = seed.split_first() {
        for &s in rest {
            if uf.union(first, s) {
                queue.push((first, s));
            }
        }
    }
    while let Some((a, b)) = queue.pop() {
        for g in group.generators() {
            let (x, y) = (g.apply(a), g.apply(b));
            let (rx, ry) = (uf.find(x), uf.find(y));
            if rx != ry {
                uf.union(rx, ry);
                queue.push((rx, ry));
            }
        }
    }
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut index_of_root = vec![usize::MAX; n];
    for x in 0..n {
        let r = uf.find(x);
        if index_of_root[r] == usize::MAX {
            index_of_root[r] = cells.len();
            cells.push(Vec::new());
        }
        cells[index_of_root[r]].push(x);
    }
    BlockSystem {
        degree: n,
        blocks: cells,
    }
}

fn require_transitive(group: &PermGroup) -> Result<()> {
    if group.is_transitive() {
        Ok(())
    } else {
        Err(Error::NotTransitive)
    }
}

pub(super) fn minimal_block_systems(group: &PermGroup) -> Result<Vec<BlockSystem>> {
    require_transitive(group)?;
    let candidates: BTreeSet<BlockSystem> = (1..group.degree())
        .map(|b| minimal_block_system(group, &[0, b]))
        .filter(|s| !s.is_trivial())
        .collect();
    let all: Vec<BlockSystem> = candidates.into_iter().collect();
    Ok(all
        .iter()
        .filter(|s| !all.iter().any(|t| t != *s && t.refines(s)))
        .cloned()
        .collect())
}

/// Every block containing point 0 is reached from `{0}` by repeatedly
/// adding one point and closing.
pub(super) fn all_block_systems(group: &PermGroup) -> Result<Vec<BlockSystem>> {
    require_transitive(group)?;
    let n = group.degree();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier = vec![vec![0usize]];
    found.insert(vec![0]);
    while let Some(block) = frontier.pop() {
        for x in 0..n {
            if block.contains(&x) {
                continue;
            }
            let mut seed = block.clone();
            seed.push(x);
            let sys = minimal_block_system(group, &seed);
            let b = sys.block_of(0).to_vec();
            if found.insert(b.clone()) {
                frontier.push(b);
            }
        }
    }
    let mut systems: Vec<BlockSystem> = found
        .iter()
        .map(|b| minimal_block_system(group, b))
        .collect();
    systems.sort_by_key(|s| (s.block_size(), s.blocks.clone()));
    Ok(systems)
}

pub(super) fn maximal_block_systems(group: &PermGroup) -> Result<Vec<BlockSystem>> {
    let nontrivial: Vec<BlockSystem> = all_block_systems(group)?
        .into_iter()
        .filter(|s| !s.is_trivial())
        .collect();
    Ok(nontrivial
        .iter()
        .filter(|s| !nontrivial.iter().any(|t| t != *s && s.refines(t)))
        .cloned()
        .collect())
}

/// Regular in the strict sense: the setwise stabilizer of the cell is
/// transitive on it and has order equal to the cell size.
pub(super) fn is_regular_on_block(group: &PermGroup, system: &BlockSystem, cap: usize) -> Result<bool> {
    require_transitive(group)?;
    let elements = group.enumerate(cap)?;
    for cell in &system.blocks {
        let stab: Vec<_> = elements
            .iter()
            .filter(|g| cell.iter().all(|x| cell.contains(&g.apply(*x))))
            .collect();
        if stab.len() != cell.len() {
            return Ok(false);
        }
        let reached: BTreeSet<usize> = stab.iter().map(|g| g.apply(cell[0])).collect();
        if reached.len() != cell.len() {
            return Ok(false);
        }
    }
    Ok(true)
}
