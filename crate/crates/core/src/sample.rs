//! Random elements for tests and benchmarks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::address::Address;
use crate::germ::{GermContext, GermElement};
use crate::perm::Perm;
use crate::permgroup::{ElementSet, PermGroup};
use crate::portrait::{ArityProfile, Portrait};
use crate::treepair::{LeafSet, TreePair};

/// Refines `expansions` random leaves of `start`.
pub fn random_refinement<R: Rng>(rng: &mut R, start: LeafSet, expansions: usize) -> LeafSet {
    let mut l = start;
    for _ in 0..expansions {
        let leaf = l.leaves.choose(rng).expect("nonempty").clone();
        l = l.refine_leaf(&leaf).expect("leaf is present");
    }
    l
}

pub fn random_leafset<R: Rng>(rng: &mut R, k: usize, d: usize, expansions: usize) -> LeafSet {
    random_refinement(rng, LeafSet::root(k, d), expansions)
}

/// A random element with both trees built from `expansions` refinements.
pub fn random_pair<R: Rng>(rng: &mut R, k: usize, d: usize, expansions: usize) -> TreePair {
    let dom = random_leafset(rng, k, d, expansions);
    let cod = random_leafset(rng, k, d, expansions);
    let mut sigma: Vec<usize> = (0..dom.len()).collect();
    sigma.shuffle(rng);
    TreePair::new(dom, cod, sigma).expect("equal leaf counts")
}

pub fn random_f_pair<R: Rng>(rng: &mut R, k: usize, d: usize, expansions: usize) -> TreePair {
    let dom = random_leafset(rng, k, d, expansions);
    let cod = random_leafset(rng, k, d, expansions);
    TreePair::order_preserving(dom, cod).expect("equal leaf counts")
}

/// Every label drawn uniformly from `elements`.
pub fn random_portrait<R: Rng>(rng: &mut R, d: usize, depth: usize, elements: &[Perm]) -> Portrait {
    let profile = ArityProfile::regular(d);
    let levels = (0..depth)
        .map(|m| {
            (0..profile.level_size(m))
                .map(|_| elements.choose(rng).expect("nonempty").clone())
                .collect()
        })
        .collect();
    Portrait::from_levels(profile, levels).expect("consistent sizes")
}

pub fn random_w_portrait<R: Rng>(rng: &mut R, d: usize, depth: usize, d_elements: &ElementSet) -> Portrait {
    random_portrait(rng, d, depth, d_elements.as_slice())
}

/// Root label in `N`; each deeper level uses one coset `D·n_m`.
pub fn random_a_portrait<R: Rng>(
    rng: &mut R,
    d: usize,
    depth: usize,
    d_elements: &ElementSet,
    n_elements: &ElementSet,
) -> Portrait {
    let profile = ArityProfile::regular(d);
    let levels = (0..depth)
        .map(|m| {
            if m == 0 {
                return vec![n_elements.as_slice().choose(rng).expect("nonempty").clone()];
            }
            let coset = n_elements.as_slice().choose(rng).expect("nonempty");
            (0..profile.level_size(m))
                .map(|_| d_elements.as_slice().choose(rng).expect("nonempty") * coset)
                .collect()
        })
        .collect();
    Portrait::from_levels(profile, levels).expect("consistent sizes")
}

/// A finitely supported germ: a random tree pair with leaves at level 1 or
/// deeper and labels of depth at most `label_depth` drawn from `Sym(d)`.
pub fn random_germ<R: Rng>(
    rng: &mut R,
    ctx: &std::sync::Arc<GermContext>,
    expansions: usize,
    label_depth: usize,
    cap: usize,
) -> GermElement {
    let (k, d) = (ctx.k, ctx.d);
    let sym = PermGroup::symmetric(d).enumerate(cap).expect("small symmetric group");
    let dom = random_refinement(rng, LeafSet::uniform(k, d, 1), expansions);
    let cod = random_refinement(rng, LeafSet::uniform(k, d, 1), expansions);
    let mut sigma: Vec<usize> = (0..dom.len()).collect();
    sigma.shuffle(rng);
    let pair = TreePair::new(dom, cod, sigma).expect("equal leaf counts");
    let mut labels: BTreeMap<Address, Portrait> = BTreeMap::new();
    for u in &pair.dom().leaves {
        if rng.gen_bool(0.5) {
            let depth = rng.gen_range(0..=label_depth);
            labels.insert(u.clone(), random_portrait(rng, d, depth, sym.as_slice()));
        }
    }
    GermElement::new(ctx.clone(), &pair, &labels).expect("valid germ")
}

/// A level-preserving germ: a random permutation of level `n` with random
/// A-portrait sections.
pub fn random_a_germ<R: Rng>(rng: &mut R, ctx: &std::sync::Arc<GermContext>, n: usize, label_depth: usize) -> GermElement {
    let (k, d) = (ctx.k, ctx.d);
    let level = LeafSet::uniform(k, d, n.max(1));
    let mut sigma: Vec<usize> = (0..level.len()).collect();
    sigma.shuffle(rng);
    let pair = TreePair::new(level.clone(), level, sigma).expect("same leaf set");
    let labels = pair
        .dom()
        .leaves
        .iter()
        .map(|u| (u.clone(), random_a_portrait(rng, d, label_depth, &ctx.d_elements, &ctx.normalizer)))
        .collect();
    GermElement::new(ctx.clone(), &pair, &labels).expect("valid germ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_pair(&mut rng, 2, 3, 4);
            assert_eq!(p.len(), 2 + 3 * 2);
            assert!(random_f_pair(&mut rng, 1, 2, 3).is_order_preserving());
        }
        let g = PermGroup::alternating(4);
        let de = g.enumerate(1000).unwrap();
        let ne = g.normalizer_in_sym(8, 1000).unwrap().group.enumerate(1000).unwrap();
        for _ in 0..20 {
            assert!(random_w_portrait(&mut rng, 4, 3, &de).is_w_portrait(&de));
            assert!(random_a_portrait(&mut rng, 4, 3, &de, &ne).is_a_portrait(&de, &ne));
        }
        let ctx = GermContext::new(2, PermGroup::alternating(3), 1000).unwrap();
        for _ in 0..10 {
            assert!(random_a_germ(&mut rng, &ctx, 2, 2).membership().in_a);
            random_germ(&mut rng, &ctx, 3, 2, 1000);
        }
    }
}
