//! Backtracking searches: normalizers in the symmetric group, permutation
//! equivalence, and abstract isomorphism.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::{generating_subset, ElementSet, PermGroup};
use crate::error::{Error, Result};
use crate::perm::Perm;

#[derive(Debug, Clone)]
pub struct Normalizer {
    pub group: PermGroup,
    pub order: usize,
}

/// A point bijection `β` from the first group's points to the second's such
/// that `x ↦ β⁻¹ x β` carries the first group onto the second.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub bijection: Perm,
    /// Images of the first group's generators under conjugation.
    pub generator_images: Vec<Perm>,
}

pub(super) fn normalizer_in_sym(group: &PermGroup, max_degree: usize, cap: usize) -> Result<Normalizer> {
    let n = group.degree();
    if n > max_degree {
        return Err(Error::DegreeTooLarge {
            degree: n,
            limit: max_degree,
        });
    }
    let elements = group.enumerate(cap)?;
    let orbit_of = orbit_index(group);
    let orbit_size: Vec<usize> = {
        let orbits = group.orbits();
        (0..n).map(|p| orbits[orbit_of[p]].len()).collect()
    };

    let mut found = Vec::new();
    let mut images = vec![usize::MAX; n];
    let mut used = vec![false; n];
    // Only bijections that permute the orbit partition can normalize.
    fn extend(
        p: usize,
        images: &mut Vec<usize>,
        used: &mut Vec<bool>,
        orbit_of: &[usize],
        orbit_size: &[usize],
        group: &PermGroup,
        elements: &ElementSet,
        found: &mut Vec<Perm>,
    ) {
        let n = images.len();
        if p == n {
            let sigma = Perm::from_images(images.clone()).expect("bijection");
            if group
                .generators()
                .iter()
                .all(|g| elements.contains(&g.conjugate_by(&sigma)))
            {
                found.push(sigma);
            }
            return;
        }
        for q in 0..n {
            if used[q] || orbit_size[p] != orbit_size[q] {
                continue;
            }
            let consistent = (0..p).all(|r| (orbit_of[r] == orbit_of[p]) == (orbit_of[images[r]] == orbit_of[q]));
            if !consistent {
                continue;
            }
            images[p] = q;
            used[q] = true;
            extend(p + 1, images, used, orbit_of, orbit_size, group, elements, found);
            used[q] = false;
        }
        images[p] = usize::MAX;
    }
    extend(0, &mut images, &mut used, &orbit_of, &orbit_size, group, &elements, &mut found);

    let order = found.len();
    let gens = generating_subset(n, &found, cap)?;
    let group = PermGroup::new(n, gens)?.with_name(format!("N_Sym({n})({})", group.display_name()));
    Ok(Normalizer { group, order })
}

fn orbit_index(group: &PermGroup) -> Vec<usize> {
    let mut idx = vec![0; group.degree()];
    for (i, orbit) in group.orbits().iter().enumerate() {
        for &p in orbit {
            idx[p] = i;
        }
    }
    idx
}

pub(super) fn verify_equivalence(g1: &PermGroup, g2: &PermGroup, beta: &Perm, cap: usize) -> Result<bool> {
    if g1.degree() != g2.degree() || beta.degree() != g1.degree() {
        return Ok(false);
    }
    let e2 = g2.enumerate(cap)?;
    if g1.order(cap)? != e2.len() {
        return Ok(false);
    }
    Ok(g1.generators().iter().all(|x| e2.contains(&x.conjugate_by(beta))))
}

/// Lexicographically smallest equivalence, found by assigning images of
/// points 0, 1, .. in turn. For each generator of `g1` the search keeps the
/// elements of `g2` still compatible with the partial bijection.
pub(super) fn permutation_equivalence(g1: &PermGroup, g2: &PermGroup, cap: usize) -> Result<Option<Equivalence>> {
    if g1.degree() != g2.degree() {
        return Err(Error::DegreeMismatch {
            expected: g1.degree(),
            found: g2.degree(),
        });
    }
    let n = g1.degree();
    let e1 = g1.enumerate(cap)?;
    let e2 = g2.enumerate(cap)?;
    if e1.len() != e2.len() {
        return Ok(None);
    }
    let mut s1: Vec<usize> = g1.orbits().iter().map(|o| o.len()).collect();
    let mut s2: Vec<usize> = g2.orbits().iter().map(|o| o.len()).collect();
    s1.sort_unstable();
    s2.sort_unstable();
    if s1 != s2 {
        return Ok(None);
    }

    let gens: Vec<Perm> = g1.generators().to_vec();
    let inv: Vec<Perm> = gens.iter().map(|g| g.inverse()).collect();
    let targets: Vec<Perm> = e2.as_slice().to_vec();
    let all: Vec<usize> = (0..targets.len()).collect();
    let mut candidates: Vec<Vec<usize>> = vec![all; gens.len()];
    let mut beta = vec![usize::MAX; n];
    let mut used = vec![false; n];

    struct Ctx<'a> {
        gens: &'a [Perm],
        inv: &'a [Perm],
        targets: &'a [Perm],
    }

    fn search(p: usize, beta: &mut Vec<usize>, used: &mut Vec<bool>, cands: &[Vec<usize>], ctx: &Ctx) -> bool {
        let n = beta.len();
        if p == n {
            return true;
        }
        for q in 0..n {
            if used[q] {
                continue;
            }
            beta[p] = q;
            used[q] = true;
            let mut next = Vec::with_capacity(cands.len());
            let mut ok = true;
            for (j, g) in ctx.gens.iter().enumerate() {
                // Constraint y(β(a)) = β(g(a)) for assigned a, g(a).
                let mut checks: Vec<(usize, usize)> = Vec::new();
                let gp = g.apply(p);
                if beta[gp] != usize::MAX {
                    checks.push((q, beta[gp]));
                }
                let gi = ctx.inv[j].apply(p);
                if gi != p && beta[gi] != usize::MAX {
                    checks.push((beta[gi], q));
                }
                let filtered: Vec<usize> = cands[j]
                    .iter()
                    .copied()
                    .filter(|&t| checks.iter().all(|&(a, b)| ctx.targets[t].apply(a) == b))
                    .collect();
                if filtered.is_empty() {
                    ok = false;
                    break;
                }
                next.push(filtered);
            }
            if ok && search(p + 1, beta, used, &next, ctx) {
                return true;
            }
            used[q] = false;
            beta[p] = usize::MAX;
        }
        false
    }

    let ctx = Ctx {
        gens: &gens,
        inv: &inv,
        targets: &targets,
    };
    if !search(0, &mut beta, &mut used, &candidates, &ctx) {
        return Ok(None);
    }
    candidates.clear();
    let bijection = Perm::from_images(beta).expect("complete bijection");
    let generator_images: Vec<Perm> = gens.iter().map(|g| g.conjugate_by(&bijection)).collect();
    debug_assert!(generator_images.iter().all(|y| e2.contains(y)));
    Ok(Some(Equivalence {
        bijection,
        generator_images,
    }))
}

fn order_histogram(elements: &ElementSet) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for e in elements.iter() {
        *h.entry(e.order()).or_insert(0) += 1;
    }
    h
}

/// Searches for an isomorphism by choosing generator images of matching
/// element order and checking that the induced map is a well-defined
/// bijective homomorphism. Cheap invariants are compared first.
pub(super) fn abstract_isomorphism(g1: &PermGroup, g2: &PermGroup, cap: usize) -> Result<Option<Vec<Perm>>> {
    let e1 = g1.enumerate(cap)?;
    let e2 = g2.enumerate(cap)?;
    if e1.len() != e2.len() || order_histogram(&e1) != order_histogram(&e2) {
        return Ok(None);
    }
    if g1.derived_subgroup(cap)?.order(cap)? != g2.derived_subgroup(cap)?.order(cap)? {
        return Ok(None);
    }
    let gens = small_generating_set(g1.degree(), &e1, cap)?;
    if gens.is_empty() {
        return Ok(Some(Vec::new()));
    }
    let by_order: HashMap<usize, Vec<&Perm>> = e2.iter().fold(HashMap::new(), |mut m, e| {
        m.entry(e.order()).or_insert_with(Vec::new).push(e);
        m
    });
    let choices: Vec<Vec<&Perm>> = gens
        .iter()
        .map(|g| by_order.get(&g.order()).cloned().unwrap_or_default())
        .collect();
    // Orders of the subgroups generated by each prefix of `gens`.
    let prefix_orders = (1..=gens.len())
        .map(|i| Ok(super::closure(g1.degree(), &gens[..i], cap)?.len()))
        .collect::<Result<Vec<usize>>>()?;

    fn assign(
        i: usize,
        images: &mut Vec<Perm>,
        gens: &[Perm],
        choices: &[Vec<&Perm>],
        prefix_orders: &[usize],
        d2: usize,
    ) -> bool {
        if i == gens.len() {
            return true;
        }
        for &c in &choices[i] {
            images.push(c.clone());
            if extends_to_isomorphism(gens[0].degree(), d2, &gens[..=i], images, prefix_orders[i])
                && assign(i + 1, images, gens, choices, prefix_orders, d2)
            {
                return true;
            }
            images.pop();
        }
        false
    }

    let mut images = Vec::with_capacity(gens.len());
    if assign(0, &mut images, &gens, &choices, &prefix_orders, g2.degree()) {
        Ok(Some(images))
    } else {
        Ok(None)
    }
}

/// A two-element generating set when one exists, otherwise a greedy one.
/// Pairs are tried with the first element of largest order.
fn small_generating_set(degree: usize, elements: &ElementSet, cap: usize) -> Result<Vec<Perm>> {
    let order = elements.len();
    let mut by_order: Vec<&Perm> = elements.iter().collect();
    by_order.sort_by_key(|e| std::cmp::Reverse(e.order()));
    let top = by_order[0].order();
    if top == order {
        return Ok(if order == 1 { Vec::new() } else { vec![by_order[0].clone()] });
    }
    for a in by_order.iter().take_while(|a| a.order() == top) {
        for b in elements.iter() {
            let pair = [(*a).clone(), b.clone()];
            if super::closure(degree, &pair, cap)?.len() == order {
                return Ok(pair.to_vec());
            }
        }
    }
    generating_subset(degree, elements.as_slice(), cap)
}

fn extends_to_isomorphism(d1: usize, d2: usize, gens: &[Perm], images: &[Perm], order: usize) -> bool {
    let mut map: HashMap<Perm, Perm> = HashMap::new();
    map.insert(Perm::identity(d1), Perm::identity(d2));
    let mut queue = VecDeque::from([Perm::identity(d1)]);
    while let Some(x) = queue.pop_front() {
        let fx = map[&x].clone();
        for (g, h) in gens.iter().zip(images) {
            let y = x.then(g);
            let fy = fx.then(h);
            match map.get(&y) {
                Some(existing) if *existing != fy => return false,
                Some(_) => {}
                None => {
                    map.insert(y.clone(), fy);
                    queue.push_back(y);
                }
            }
        }
    }
    let distinct: HashSet<&Perm> = map.values().collect();
    map.len() == order && distinct.len() == order
}
