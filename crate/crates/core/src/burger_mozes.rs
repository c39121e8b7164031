//! Finite balls in the `d`-regular tree with a legal edge colouring, and
//! their groups of colour-admissible automorphisms.
//!
//! A ball group element is a permutation of the ball's vertices. Its local
//! action at an interior vertex `v` is the permutation of colours
//! `c ↦ colour of the image of the colour-c edge at v`; the element is
//! admissible when every local action lies in `F`.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::{generating_subset, Equivalence, PermGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterKind {
    Vertex,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BallVertex {
    /// The neighbour toward the centre; for an edge ball the two endpoints
    /// are each other's parent.
    pub parent: Option<usize>,
    /// Colour of the edge to `parent`.
    pub parent_colour: Option<usize>,
    /// Distance to the centre vertex, or to the nearer endpoint.
    pub distance: usize,
    /// `children[c]` is the neighbour across the colour-`c` edge, away from
    /// the centre. Empty on the boundary sphere.
    pub children: Vec<Option<usize>>,
}

impl BallVertex {
    pub fn is_interior(&self) -> bool {
        !self.children.is_empty()
    }
}

/// A ball with the canonical colouring, vertices in breadth-first order.
///
/// Vertex ball of radius `R`: all vertices within distance `R` of the
/// centre, whose edges get colours `0..d`. Edge ball of radius `R`: all
/// vertices within distance `R` of an endpoint of the central edge, which
/// has colour 0. Every other vertex gives its child edges the colours other
/// than its parent colour, in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColouredBall {
    pub d: usize,
    pub radius: usize,
    pub center_kind: CenterKind,
    pub vertices: Vec<BallVertex>,
}

impl ColouredBall {
    pub fn new(d: usize, radius: usize, center_kind: CenterKind) -> Result<Self> {
        if d < 2 {
            return Err(Error::IncompatibleParameters);
        }
        let mut vertices = Vec::new();
        let mut queue = Vec::new();
        match center_kind {
            CenterKind::Vertex => {
                vertices.push(BallVertex {
                    parent: None,
                    parent_colour: None,
                    distance: 0,
                    children: Vec::new(),
                });
                queue.push(0);
            }
            CenterKind::Edge => {
                for (v, other) in [(0, 1), (1, 0)] {
                    vertices.push(BallVertex {
                        parent: Some(other),
                        parent_colour: Some(0),
                        distance: 0,
                        children: Vec::new(),
                    });
                    queue.push(v);
                }
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            if vertices[v].distance >= radius {
                continue;
            }
            let mut children = vec![None; d];
            for (c, slot) in children.iter_mut().enumerate() {
                if Some(c) == vertices[v].parent_colour {
                    continue;
                }
                let w = vertices.len();
                vertices.push(BallVertex {
                    parent: Some(v),
                    parent_colour: Some(c),
                    distance: vertices[v].distance + 1,
                    children: Vec::new(),
                });
                *slot = Some(w);
                queue.push(w);
            }
            vertices[v].children = children;
        }
        Ok(ColouredBall {
            d,
            radius,
            center_kind,
            vertices,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Neighbour of `v` across its colour-`c` edge.
    pub fn neighbour(&self, v: usize, c: usize) -> Option<usize> {
        let vx = &self.vertices[v];
        if vx.parent_colour == Some(c) {
            vx.parent
        } else {
            vx.children.get(c).copied().flatten()
        }
    }

    /// Every edge once, as `(u, v, colour)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for (v, vx) in self.vertices.iter().enumerate() {
            if let (Some(p), Some(c)) = (vx.parent, vx.parent_colour) {
                out.insert((v.min(p), v.max(p), c));
            }
        }
        out.into_iter().collect()
    }

    /// Colours at every interior vertex are distinct and number `d`.
    pub fn is_legal(&self) -> bool {
        (0..self.len()).filter(|&v| self.vertices[v].is_interior()).all(|v| {
            let seen: HashSet<usize> = (0..self.d)
                .filter(|&c| self.neighbour(v, c).is_some())
                .collect();
            seen.len() == self.d
        })
    }

    /// Vertices of the half-ball on the side of endpoint `e` (edge balls).
    pub fn half(&self, e: usize) -> Vec<usize> {
        let mut out = vec![e];
        let mut i = 0;
        while i < out.len() {
            let v = out[i];
            out.extend(self.vertices[v].children.iter().flatten().copied());
            i += 1;
        }
        out.sort_unstable();
        out
    }

    /// Local action of a ball automorphism at an interior vertex.
    pub fn local_action(&self, g: &Perm, v: usize) -> Option<Perm> {
        if !self.vertices[v].is_interior() {
            return None;
        }
        let w = g.apply(v);
        let images = (0..self.d)
            .map(|c| {
                let n = self.neighbour(v, c)?;
                let gn = g.apply(n);
                (0..self.d).find(|&c2| self.neighbour(w, c2) == Some(gn))
            })
            .collect::<Option<Vec<_>>>()?;
        Perm::from_images(images).ok()
    }

    /// Checks that `g` is a graph automorphism whose local actions lie in
    /// the element set `f`.
    pub fn is_admissible(&self, g: &Perm, f: &HashSet<Perm>) -> bool {
        for (v, vx) in self.vertices.iter().enumerate() {
            if let Some(p) = vx.parent {
                let (gv, gp) = (g.apply(v), g.apply(p));
                let adjacent = self.vertices[gv].parent == Some(gp) || self.vertices[gp].parent == Some(gv);
                if !adjacent {
                    return false;
                }
            }
            if vx.is_interior() {
                match self.local_action(g, v) {
                    Some(t) if f.contains(&t) => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

/// The colour-admissible automorphisms of a ball.
#[derive(Debug, Clone)]
pub struct BallGroup {
    pub ball: ColouredBall,
    pub f: PermGroup,
    /// Sorted.
    pub elements: Vec<Perm>,
}

impl BallGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Elements fixing both endpoints of the central edge (edge balls), or
    /// all elements (vertex balls).
    pub fn edge_fixing(&self) -> Vec<&Perm> {
        self.elements
            .iter()
            .filter(|g| self.ball.center_kind == CenterKind::Vertex || g.fixes(0))
            .collect()
    }

    /// Action on the first `m` vertices; the ball of radius `R − 1` is such
    /// a prefix.
    pub fn restrict_to_prefix(&self, m: usize) -> Vec<Perm> {
        let set: BTreeSet<Perm> = self
            .elements
            .iter()
            .map(|g| Perm::from_images(g.images()[..m].to_vec()).expect("prefix is invariant"))
            .collect();
        set.into_iter().collect()
    }
}

/// `|F| · |F_a|^(interior non-centre vertices)` for a vertex ball.
pub fn predicted_vertex_ball_order(f: &PermGroup, radius: usize, cap: usize) -> Result<u128> {
    let d = f.degree() as u128;
    let fo = f.order(cap)? as u128;
    let fa = f.point_stabilizer(0, cap)?.full.order(cap)? as u128;
    if radius == 0 {
        return Ok(1);
    }
    let mut interior: u128 = 0;
    let mut sphere = d;
    for _ in 1..radius {
        interior += sphere;
        sphere *= d - 1;
    }
    let exp = u32::try_from(interior).map_err(|_| Error::Overflow("ball order"))?;
    fa.checked_pow(exp)
        .and_then(|x| x.checked_mul(fo))
        .ok_or(Error::Overflow("ball order"))
}

/// Enumerates every admissible automorphism by depth-first extension of
/// local actions, vertex by vertex in breadth-first order.
pub fn build_ball_group(f: &PermGroup, radius: usize, center_kind: CenterKind, cap: usize) -> Result<BallGroup> {
    let d = f.degree();
    let ball = ColouredBall::new(d, radius, center_kind)?;
    let f_elements = f.enumerate(cap)?;
    // by_pair[(a, b)]: elements τ of F with τ(a) = b.
    let mut by_pair: HashMap<(usize, usize), Vec<&Perm>> = HashMap::new();
    for t in f_elements.iter() {
        for a in 0..d {
            by_pair.entry((a, t.apply(a))).or_default().push(t);
        }
    }
    let all: Vec<&Perm> = f_elements.iter().collect();
    let n = ball.len();
    let starts: Vec<Vec<usize>> = match center_kind {
        CenterKind::Vertex => vec![vec![0]],
        CenterKind::Edge => vec![vec![0, 1], vec![1, 0]],
    };

    struct Search<'a> {
        ball: &'a ColouredBall,
        by_pair: &'a HashMap<(usize, usize), Vec<&'a Perm>>,
        all: &'a [&'a Perm],
        cap: usize,
        out: Vec<Perm>,
    }

    impl Search<'_> {
        fn extend(&mut self, v: usize, images: &mut Vec<usize>) -> Result<()> {
            let n = self.ball.len();
            if v == n {
                if self.out.len() >= self.cap {
                    return Err(Error::OrderExceedsCap(self.cap));
                }
                self.out.push(Perm::from_images(images.clone()).expect("ball automorphism"));
                return Ok(());
            }
            let vx = &self.ball.vertices[v];
            if !vx.is_interior() {
                return self.extend(v + 1, images);
            }
            let w = images[v];
            let choices: &[&Perm] = match (vx.parent_colour, self.ball.vertices[w].parent_colour) {
                (None, None) => self.all,
                (Some(a), Some(b)) => self.by_pair.get(&(a, b)).map_or(&[], |c| c.as_slice()),
                _ => &[],
            };
            for &t in choices {
                for c in 0..self.ball.d {
                    if let Some(child) = vx.children[c] {
                        images[child] = self.ball.vertices[w].children[t.apply(c)].expect("matching slot");
                    }
                }
                self.extend(v + 1, images)?;
            }
            Ok(())
        }
    }

    let mut search = Search {
        ball: &ball,
        by_pair: &by_pair,
        all: &all,
        cap,
        out: Vec::new(),
    };
    for start in starts {
        let mut images = vec![usize::MAX; n];
        images[..start.len()].copy_from_slice(&start);
        search.extend(0, &mut images)?;
    }
    let mut elements = search.out;
    elements.sort();
    Ok(BallGroup {
        ball,
        f: f.clone(),
        elements,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub transitive: bool,
    pub generated_by_point_stabilizers: bool,
    pub verdict: bool,
}

pub fn bm_admissible(f: &PermGroup, cap: usize) -> Result<Admissibility> {
    let transitive = f.is_transitive();
    let generated_by_point_stabilizers = transitive && f.is_generated_by_point_stabilizers(cap)?;
    Ok(Admissibility {
        transitive,
        generated_by_point_stabilizers,
        verdict: transitive && generated_by_point_stabilizers,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TitsReport {
    pub fix_e: usize,
    pub fix_h1: usize,
    pub fix_h2: usize,
    pub intersection_trivial: bool,
    pub orders_multiply: bool,
    pub every_element_splits: bool,
    pub factorizes: bool,
}

/// Checks `fix(e) = fix(h1) · fix(h2)` in the edge ball of radius `R`, where
/// `fix(h_i)` fixes the half-ball on the side of endpoint `i - 1` pointwise.
pub fn tits_independence_check(f: &PermGroup, radius: usize, cap: usize) -> Result<TitsReport> {
    let group = build_ball_group(f, radius, CenterKind::Edge, cap)?;
    Ok(tits_report(&group))
}

pub fn tits_report(group: &BallGroup) -> TitsReport {
    let fix_e: Vec<&Perm> = group.edge_fixing();
    let fixes_all = |g: &Perm, vs: &[usize]| vs.iter().all(|&v| g.fixes(v));
    let h1_vertices = group.ball.half(0);
    let h2_vertices = group.ball.half(1);
    let fix_h1: Vec<&Perm> = fix_e.iter().copied().filter(|g| fixes_all(g, &h1_vertices)).collect();
    let fix_h2: Vec<&Perm> = fix_e.iter().copied().filter(|g| fixes_all(g, &h2_vertices)).collect();
    let intersection_trivial = fix_h1
        .iter()
        .filter(|g| fixes_all(g, &h2_vertices))
        .all(|g| g.is_identity());
    let orders_multiply = fix_e.len() == fix_h1.len() * fix_h2.len();
    let products: HashSet<Perm> = fix_h1
        .iter()
        .flat_map(|a| fix_h2.iter().map(move |b| a.then(b)))
        .collect();
    let every_element_splits = fix_e.iter().all(|g| products.contains(*g)) && products.len() == fix_e.len();
    TitsReport {
        fix_e: fix_e.len(),
        fix_h1: fix_h1.len(),
        fix_h2: fix_h2.len(),
        intersection_trivial,
        orders_multiply,
        every_element_splits,
        factorizes: intersection_trivial && orders_multiply && every_element_splits,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Recovery {
    /// Radius of the vertex ball the recipe ran on.
    pub radius: usize,
    pub k_order: usize,
    pub k_cap_l_order: usize,
    pub conjugates: usize,
    pub c_order: usize,
    pub quotient_order: usize,
    /// Kernel of K's action on the edges at `v` equals C.
    pub kernel_is_c: bool,
    #[serde(serialize_with = "serialize_group")]
    pub recovered: PermGroup,
    pub equivalence: Option<Equivalence>,
}

fn serialize_group<S: serde::Serializer>(g: &PermGroup, s: S) -> std::result::Result<S::Ok, S::Error> {
    let gens: Vec<String> = g.generators().iter().map(|p| p.to_cycle_string()).collect();
    gens.serialize(s)
}

/// Runs `K/C` recovery. `K` is the stabilizer of the vertex `v`, `L` that
/// of its colour-0 neighbour `u`, and `C` the intersection of the
/// conjugates of `K ∩ L` under `K`. In a finite edge ball both endpoints are
/// fixed by every edge-fixing element, so the recipe is run in the vertex
/// ball of the same radius about `v`; an edge ball argument is replaced by
/// that vertex ball. `K/C` is realised as the action of `K` on the edges at
/// `v`, each conjugate of `K ∩ L` being the stabilizer of one neighbour.
pub fn recover_local_action(ball: &BallGroup, cap: usize) -> Result<Recovery> {
    let vertex_group;
    let group = match ball.ball.center_kind {
        CenterKind::Vertex => ball,
        CenterKind::Edge => {
            vertex_group = build_ball_group(&ball.f, ball.ball.radius, CenterKind::Vertex, cap)?;
            &vertex_group
        }
    };
    if group.ball.radius == 0 {
        return Err(Error::RecipeDegenerate("ball of radius 0 has no edges".into()));
    }
    let d = group.ball.d;
    let v = 0;
    let u = group.ball.neighbour(v, 0).expect("interior centre");
    let k: Vec<&Perm> = group.elements.iter().filter(|g| g.fixes(v)).collect();
    let kl: BTreeSet<&Perm> = k.iter().copied().filter(|g| g.fixes(u)).collect();
    if kl.len() == k.len() {
        return Err(Error::RecipeDegenerate(format!(
            "K ∩ L = K (order {}), so the conjugates carry no action",
            k.len()
        )));
    }
    let conjugates: BTreeSet<BTreeSet<Perm>> = k
        .iter()
        .map(|g| kl.iter().map(|x| x.conjugate_by(g)).collect())
        .collect();
    let c: BTreeSet<Perm> = conjugates
        .iter()
        .skip(1)
        .fold(conjugates.iter().next().cloned().unwrap_or_default(), |acc, s| {
            acc.intersection(s).cloned().collect()
        });
    // The conjugate of K ∩ L by g is the stabilizer of g(u); edge colours
    // at v index those neighbours.
    let actions: Vec<Perm> = k
        .iter()
        .map(|g| group.ball.local_action(g, v).expect("centre is interior"))
        .collect();
    let kernel: BTreeSet<Perm> = k
        .iter()
        .zip(&actions)
        .filter(|(_, t)| t.is_identity())
        .map(|(g, _)| (*g).clone())
        .collect();
    let distinct: BTreeSet<Perm> = actions.iter().cloned().collect();
    let distinct: Vec<Perm> = distinct.into_iter().collect();
    let gens = generating_subset(d, &distinct, cap)?;
    let recovered = PermGroup::new(d, gens)?.with_name("K/C");
    let equivalence = recovered.permutation_equivalence(&group.f, cap)?;
    Ok(Recovery {
        radius: group.ball.radius,
        k_order: k.len(),
        k_cap_l_order: kl.len(),
        conjugates: conjugates.len(),
        c_order: c.len(),
        quotient_order: k.len() / c.len().max(1),
        kernel_is_c: kernel == c,
        recovered,
        equivalence,
    })
}

/// One audit row for a group `F` of degree `d + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditRow {
    pub name: String,
    pub degree: usize,
    pub order: usize,
    pub bm_admissible: bool,
    pub locally_primitive: bool,
    pub two_transitive: bool,
    pub f0_order: usize,
    pub f0_normalizer_order: usize,
    /// `None` when `F` is not 2-transitive and the condition does not apply.
    pub f0_self_normalizing: Option<bool>,
    pub f0_perfect: bool,
    pub f0_in_alt: bool,
    /// Compact generation of the germ group, predicted from 2-transitivity
    /// and self-normalization of `F_0`.
    pub predicted_compactly_generated: Option<bool>,
    /// `[acomm : M]` for `M = M(F_0, 2)`: 2 iff `d` is odd and `F_0 ≤ Alt(d)`.
    pub predicted_commensurator_index: u8,
}

pub fn audit_theorems(f: &PermGroup, max_sym_degree: usize, cap: usize) -> Result<AuditRow> {
    let adm = bm_admissible(f, cap)?;
    let locally_primitive = adm.transitive && f.is_primitive()?;
    let two_transitive = f.transitivity_degree(cap)? >= 2;
    let stab = f.point_stabilizer(0, cap)?;
    let f0 = &stab.restricted;
    let f0_order = f0.order(cap)?;
    let f0_normalizer_order = f0.normalizer_in_sym(max_sym_degree, cap)?.order;
    let flags = f0.structure_flags(cap)?;
    let self_normalizing = f0_normalizer_order == f0_order;
    let d = f0.degree();
    Ok(AuditRow {
        name: f.display_name(),
        degree: f.degree(),
        order: f.order(cap)?,
        bm_admissible: adm.verdict,
        locally_primitive,
        two_transitive,
        f0_order,
        f0_normalizer_order,
        f0_self_normalizing: two_transitive.then_some(self_normalizing),
        f0_perfect: flags.is_perfect,
        f0_in_alt: flags.in_alternating,
        predicted_compactly_generated: two_transitive.then_some(self_normalizing),
        predicted_commensurator_index: if d % 2 == 1 && flags.in_alternating { 2 } else { 1 },
    })
}
