//! Finitely supported germs of automorphisms of `W(D)^k`.
//!
//! A germ is a finite list of pieces `(u, v, α)`: the subtree below the dom
//! leaf `u` is carried onto the subtree below the cod leaf `v`, acting as
//! the portrait `α` on the way, so `g(u·w) = v·α(w)`. Dom and cod leaves
//! form complete prefix codes of `T_{d,k}` and lie at level 1 or deeper.
//!
//! The stored form is canonical. A vertex `x` is *good* when `g` carries
//! the subtree at `x` rigidly onto a subtree with an A-portrait section
//! (labels in `N = N_Sym(d)(D)`, each level inside one coset of `D`). Good
//! vertices are closed under taking children, and the stored pieces are
//! exactly the minimal good vertices of level at least 1. Two germs are
//! equal iff their stored forms are equal.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::catalog::{self, GeneratorSpec};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::{ElementSet, PermGroup, DEFAULT_SYM_DEGREE};
use crate::portrait::{ArityProfile, Portrait, PortraitJson};
use crate::treepair::{LeafSet, TreePair};

/// Parameters shared by all germs of one commensurator.
#[derive(Debug)]
pub struct GermContext {
    pub d: usize,
    pub k: usize,
    pub group: PermGroup,
    pub d_elements: ElementSet,
    pub normalizer: ElementSet,
    pub in_alternating: bool,
}

impl GermContext {
    pub fn new(k: usize, group: PermGroup, cap: usize) -> Result<Arc<GermContext>> {
        let d = group.degree();
        if k == 0 || d < 2 {
            return Err(Error::IncompatibleParameters);
        }
        let d_elements = group.enumerate(cap)?;
        let normalizer = group
            .normalizer_in_sym(DEFAULT_SYM_DEGREE.max(d), cap)?
            .group
            .enumerate(cap)?;
        let in_alternating = group.generators().iter().all(|g| g.is_even());
        Ok(Arc::new(GermContext {
            d,
            k,
            group,
            d_elements,
            normalizer,
            in_alternating,
        }))
    }

    pub fn profile(&self) -> ArityProfile {
        ArityProfile::regular(self.d)
    }

    pub fn is_a(&self, p: &Portrait) -> bool {
        p.is_a_portrait(&self.d_elements, &self.normalizer)
    }

    pub fn is_w(&self, p: &Portrait) -> bool {
        p.is_w_portrait(&self.d_elements)
    }

    fn same_as(&self, other: &GermContext) -> bool {
        self.d == other.d && self.k == other.k && self.d_elements.as_slice() == other.d_elements.as_slice()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Piece {
    pub dom: Address,
    pub cod: Address,
    pub label: Portrait,
}

impl Piece {
    /// Splits into the `d` child pieces; the label's root permutation
    /// routes children and its sections become the child labels.
    fn split(&self) -> Vec<Piece> {
        let root = self.label.root_label();
        (0..root.degree())
            .map(|c| Piece {
                dom: self.dom.child(c),
                cod: self.cod.child(root.apply(c)),
                label: self.label.section(&Address(vec![c])).trimmed(),
            })
            .collect()
    }
}

#[derive(Clone)]
pub struct GermElement {
    ctx: Arc<GermContext>,
    pieces: Vec<Piece>,
}

impl PartialEq for GermElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_as(&other.ctx) && self.pieces == other.pieces
    }
}

impl Eq for GermElement {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Membership {
    /// Always true: below its labels every finitely supported germ is a
    /// tree-pair element.
    pub in_v: bool,
    pub in_f: bool,
    pub in_a: bool,
    pub in_o: bool,
    pub in_wtilde: bool,
    /// All labels of the stored form are trivial.
    pub labels_trivial: bool,
    /// Least `n` such that `g` maps level `n` onto itself with A-portrait
    /// sections.
    pub min_level_a: Option<usize>,
    /// Same, with W-portrait sections.
    pub min_level_o: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChiReport {
    pub value: u8,
    pub level: usize,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MReport {
    pub in_m: bool,
    pub rationale: String,
}

impl GermElement {
    /// Builds a germ from pieces and brings it to canonical form.
    pub fn from_pieces(ctx: Arc<GermContext>, pieces: Vec<Piece>) -> Result<GermElement> {
        let (k, d) = (ctx.k, ctx.d);
        for p in &pieces {
            if p.dom.is_empty() || p.cod.is_empty() {
                return Err(Error::MalformedPair("germ pieces lie at level 1 or deeper".into()));
            }
            if p.label.profile() != ctx.profile() {
                return Err(Error::ProfileMismatch);
            }
        }
        LeafSet::validate(k, d, pieces.iter().map(|p| p.dom.clone()).collect())?;
        LeafSet::validate(k, d, pieces.iter().map(|p| p.cod.clone()).collect())?;
        let mut g = GermElement { ctx, pieces };
        g.normalize();
        Ok(g)
    }

    /// A germ from a tree pair and labels on its dom leaves (missing labels
    /// are the identity). A root leaf is first refined to level 1.
    pub fn new(ctx: Arc<GermContext>, pair: &TreePair, labels: &BTreeMap<Address, Portrait>) -> Result<GermElement> {
        if pair.k() != ctx.k || pair.d() != ctx.d {
            return Err(Error::IncompatibleParameters);
        }
        for a in labels.keys() {
            if pair.dom().position(a).is_none() {
                return Err(Error::LeafAbsent(a.clone()));
            }
        }
        let mut pieces: Vec<Piece> = Vec::new();
        for (u, v) in pair.pairs() {
            let label = labels
                .get(&u)
                .cloned()
                .unwrap_or_else(|| Portrait::identity(ctx.profile(), 0));
            if u.is_empty() {
                if !label.is_identity() {
                    return Err(Error::MalformedPair("a label on the root leaf".into()));
                }
                for c in 0..ctx.k {
                    pieces.push(Piece {
                        dom: Address(vec![c]),
                        cod: Address(vec![c]),
                        label: Portrait::identity(ctx.profile(), 0),
                    });
                }
            } else {
                pieces.push(Piece { dom: u, cod: v, label });
            }
        }
        GermElement::from_pieces(ctx, pieces)
    }

    pub fn identity(ctx: Arc<GermContext>) -> GermElement {
        let pieces = (0..ctx.k)
            .map(|c| Piece {
                dom: Address(vec![c]),
                cod: Address(vec![c]),
                label: Portrait::identity(ctx.profile(), 0),
            })
            .collect();
        let mut g = GermElement { ctx, pieces };
        g.normalize();
        g
    }

    /// The image of a tree-pair element.
    pub fn lift(ctx: Arc<GermContext>, pair: &TreePair) -> Result<GermElement> {
        GermElement::new(ctx, pair, &BTreeMap::new())
    }

    pub fn context(&self) -> &Arc<GermContext> {
        &self.ctx
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_identity(&self) -> bool {
        *self == GermElement::identity(self.ctx.clone())
    }

    fn normalize(&mut self) {
        // Push non-A labels down until every label is an A-portrait.
        let mut stack: Vec<Piece> = std::mem::take(&mut self.pieces);
        let mut done = Vec::with_capacity(stack.len());
        while let Some(mut p) = stack.pop() {
            p.label = p.label.trimmed();
            if self.ctx.is_a(&p.label) {
                done.push(p);
            } else {
                stack.extend(p.split());
            }
        }
        done.sort_by(|a, b| a.dom.cmp(&b.dom));
        // Shift-reduce: a family is complete when its last child arrives,
        // and a merged parent may complete its own family in turn.
        let d = self.ctx.d;
        let mut out: Vec<Piece> = Vec::with_capacity(done.len());
        for p in done {
            out.push(p);
            while out.len() >= d {
                let i = out.len() - d;
                match merge_family(&self.ctx, &out[i..]) {
                    Some(m) => {
                        out.truncate(i);
                        out.push(m);
                    }
                    None => break,
                }
            }
        }
        self.pieces = out;
    }

    /// Image of an address at or below a dom leaf.
    pub fn apply(&self, a: &Address) -> Option<Address> {
        let p = self.piece_above(a)?;
        let tail = p.dom.suffix_of(a).expect("prefix");
        Some(p.cod.concat(&p.label.apply_path(tail)))
    }

    fn piece_above(&self, a: &Address) -> Option<&Piece> {
        let i = match self.pieces.binary_search_by(|p| p.dom.cmp(a)) {
            Ok(i) => i,
            Err(0) => return None,
            Err(i) => i - 1,
        };
        let p = &self.pieces[i];
        p.dom.is_prefix_of(a).then_some(p)
    }

    pub fn inverse(&self) -> GermElement {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                dom: p.cod.clone(),
                cod: p.dom.clone(),
                label: p.label.inverse(),
            })
            .collect();
        let mut g = GermElement {
            ctx: self.ctx.clone(),
            pieces,
        };
        g.pieces.sort_by(|a, b| a.dom.cmp(&b.dom));
        g.normalize();
        g
    }

    /// Right-action product: apply `self`, then `other`.
    pub fn compose(&self, other: &GermElement) -> Result<GermElement> {
        if !self.ctx.same_as(&other.ctx) {
            return Err(Error::IncompatibleParameters);
        }
        // Split until every left cod is a right dom: a right piece above a
        // left cod is split, a left piece above right doms is split.
        let mut right: BTreeMap<Address, Piece> = other.pieces.iter().map(|p| (p.dom.clone(), p.clone())).collect();
        let mut queue: Vec<Piece> = self.pieces.clone();
        let mut left: BTreeMap<Address, Piece> = BTreeMap::new();
        while let Some(l) = queue.pop() {
            if right.contains_key(&l.cod) {
                left.insert(l.cod.clone(), l);
                continue;
            }
            let above = (1..l.cod.len()).map(|n| Address(l.cod.0[..n].to_vec())).find(|u| right.contains_key(u));
            match above {
                Some(u) => {
                    let r = right.remove(&u).expect("present");
                    for c in r.split() {
                        right.insert(c.dom.clone(), c);
                    }
                    queue.push(l);
                }
                None => queue.extend(l.split()),
            }
        }
        let mut pieces = Vec::with_capacity(left.len());
        for (mid, l) in left {
            let r = &right[&mid];
            pieces.push(Piece {
                dom: l.dom,
                cod: r.cod.clone(),
                label: l.label.compose(&r.label)?,
            });
        }
        pieces.sort_by(|a, b| a.dom.cmp(&b.dom));
        let mut g = GermElement {
            ctx: self.ctx.clone(),
            pieces,
        };
        g.normalize();
        Ok(g)
    }

    /// `max(|u| + depth(α))` over pieces.
    pub fn total_depth(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| p.dom.len() + p.label.effective_depth())
            .max()
            .unwrap_or(0)
    }

    /// Permutation of the level-`n` addresses: each is sent to the planar
    /// rank of its image among the images of the whole level. When `g`
    /// preserves levels this is the literal action on level `n`.
    pub fn induced_level_perm(&self, n: usize) -> Result<Perm> {
        let required = self.total_depth();
        if n < required {
            return Err(Error::LevelTooShallow { level: n, required });
        }
        let level = Address::level(self.ctx.k, self.ctx.d, n);
        let images: Vec<Address> = level
            .iter()
            .map(|a| self.apply(a).expect("level below every dom leaf"))
            .collect();
        let mut sorted = images.clone();
        sorted.sort();
        let ranks = images
            .iter()
            .map(|x| sorted.binary_search(x).expect("present"))
            .collect();
        Perm::from_images(ranks)
    }

    pub fn sign_at_level(&self, n: usize) -> Result<u8> {
        Ok(self.induced_level_perm(n)?.sign_bit())
    }

    /// Sign of the induced permutation at the total depth.
    pub fn chi_sign(&self) -> ChiReport {
        let level = self.total_depth();
        let value = self.sign_at_level(level).expect("total depth is deep enough");
        let note = if self.ctx.d % 2 == 1 {
            "d odd: the same value at every deeper level".to_string()
        } else {
            "d even: value at the total depth only; every deeper level is even".to_string()
        };
        ChiReport { value, level, note }
    }

    /// Image leaf set of a refinement `L` of the dom leaves, with the
    /// bijection `L[i] ↦ image[σ[i]]`.
    pub fn phi_leafmap(&self, l: &LeafSet) -> Result<(LeafSet, Vec<usize>)> {
        let images = l
            .leaves
            .iter()
            .map(|x| self.apply(x).ok_or_else(|| Error::NotARefinement(x.clone())))
            .collect::<Result<Vec<_>>>()?;
        let image_set = LeafSet::validate(self.ctx.k, self.ctx.d, images.clone())?;
        let sigma = images
            .iter()
            .map(|x| image_set.position(x).expect("present"))
            .collect();
        Ok((image_set, sigma))
    }

    /// The underlying tree-pair element, after pushing every label below
    /// its support.
    pub fn to_treepair(&self) -> TreePair {
        let mut stack = self.pieces.clone();
        let mut pairs = Vec::new();
        while let Some(p) = stack.pop() {
            if p.label.is_identity() {
                pairs.push((p.dom, p.cod));
            } else {
                stack.extend(p.split());
            }
        }
        TreePair::from_pairs(self.ctx.k, self.ctx.d, pairs)
            .expect("pieces form a tree pair")
            .reduce()
    }

    /// Least level `n` at which every piece, split down to level `n`, is
    /// level-preserving with sections satisfying `ok`.
    fn min_level(&self, ok: impl Fn(&Portrait) -> bool) -> Option<usize> {
        let mut n = 0;
        for p in &self.pieces {
            if p.dom.len() != p.cod.len() {
                return None;
            }
            let depth = p.label.effective_depth();
            let m = (0..=depth)
                .find(|&m| {
                    Address::level(self.ctx.d, self.ctx.d, m)
                        .iter()
                        .all(|w| ok(&p.label.section(w)))
                })
                .expect("sections below the support are trivial");
            n = n.max(p.dom.len() + m);
        }
        Some(n)
    }

    pub fn membership(&self) -> Membership {
        let labels_trivial = self.pieces.iter().all(|p| p.label.is_identity());
        let in_f = self.to_treepair().is_order_preserving();
        let min_level_a = self.min_level(|p| self.ctx.is_a(p));
        let min_level_o = self.min_level(|p| self.ctx.is_w(p));
        let in_wtilde = self
            .pieces
            .iter()
            .all(|p| p.dom.len() == 1 && p.cod.len() == 1 && self.ctx.is_w(&p.label));
        Membership {
            in_v: true,
            in_f,
            in_a: min_level_a.is_some(),
            in_o: min_level_o.is_some(),
            in_wtilde,
            labels_trivial,
            min_level_a,
            min_level_o,
        }
    }

    /// `g = lift(f) · a` with `f` order-preserving and `a` level-preserving.
    pub fn factor_fa(&self) -> Result<(TreePair, GermElement)> {
        // Splitting keeps labels A-portraits, so the deepest cod leaf sets
        // the level.
        let n = self.pieces.iter().map(|p| p.cod.len()).max().unwrap_or(1);
        let mut stack = self.pieces.clone();
        let mut refined = Vec::new();
        while let Some(p) = stack.pop() {
            if p.cod.len() < n {
                stack.extend(p.split());
            } else {
                refined.push(p);
            }
        }
        let dom = LeafSet::validate(self.ctx.k, self.ctx.d, refined.iter().map(|p| p.dom.clone()).collect())?;
        let f = TreePair::order_preserving(dom, LeafSet::uniform(self.ctx.k, self.ctx.d, n))?.reduce();
        let a = GermElement::lift(self.ctx.clone(), &f)?.inverse().compose(self)?;
        Ok((f, a))
    }

    /// Membership in `M`. When `d` is odd and `D ≤ Alt(d)`, `M` has index 2
    /// and is the kernel of `χ`; otherwise it is everything.
    pub fn in_m(&self) -> MReport {
        if self.ctx.d % 2 == 1 && self.ctx.in_alternating {
            let chi = self.chi_sign().value;
            MReport {
                in_m: chi == 0,
                rationale: format!("index 2 (d odd, D inside Alt(d)): M = F·A⁺ is the kernel of χ; χ = {chi}"),
            }
        } else {
            MReport {
                in_m: true,
                rationale: "index 1: d is even or D is not inside Alt(d), so M is the whole commensurator".into(),
            }
        }
    }

    /// Canonical form as a tree pair plus labels keyed by dom leaf.
    pub fn to_parts(&self) -> (TreePair, BTreeMap<Address, Portrait>) {
        let pairs = self.pieces.iter().map(|p| (p.dom.clone(), p.cod.clone())).collect();
        let pair = TreePair::from_pairs(self.ctx.k, self.ctx.d, pairs).expect("pieces form a tree pair");
        let labels = self
            .pieces
            .iter()
            .filter(|p| !p.label.is_identity())
            .map(|p| (p.dom.clone(), p.label.clone()))
            .collect();
        (pair, labels)
    }

    pub fn to_json(&self) -> GermJson {
        let (pair, labels) = self.to_parts();
        GermJson {
            d: self.ctx.d,
            k: self.ctx.k,
            group: GroupSpec::Generators(
                self.ctx
                    .group
                    .generators()
                    .iter()
                    .map(|g| GeneratorSpec::Cycles(g.to_cycle_string()))
                    .collect(),
            ),
            pair: pair.to_text(),
            labels: labels
                .iter()
                .map(|(a, p)| (a.to_string(), PortraitJson::from(p)))
                .collect(),
        }
    }
}

/// The parent piece of a full sibling family, when the family's images are
/// the children of one vertex and the merged label is an A-portrait.
fn merge_family(ctx: &GermContext, family: &[Piece]) -> Option<Piece> {
    let first = &family[0];
    if first.dom.last() != Some(0) || first.dom.len() < 2 {
        return None;
    }
    let p = first.dom.parent()?;
    let q = first.cod.parent()?;
    if q.is_empty() {
        return None;
    }
    let mut tau = Vec::with_capacity(family.len());
    for (c, piece) in family.iter().enumerate() {
        if piece.dom != p.child(c) || piece.cod.parent().as_ref() != Some(&q) {
            return None;
        }
        tau.push(piece.cod.last()?);
    }
    let tau = Perm::from_images(tau).ok()?;
    let children: Vec<Portrait> = family.iter().map(|x| x.label.clone()).collect();
    let label = Portrait::from_root_and_children(tau, &children).ok()?;
    ctx.is_a(&label).then(|| Piece {
        dom: p,
        cod: q,
        label: label.trimmed(),
    })
}

impl fmt::Debug for GermElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pieces
            .iter()
            .map(|p| {
                if p.label.is_identity() {
                    format!("{:?}->{:?}", p.dom, p.cod)
                } else {
                    format!("{:?}->{:?}{:?}", p.dom, p.cod, p.label.labels())
                }
            })
            .collect();
        write!(f, "Germ[{}]", parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Name(String),
    Generators(Vec<GeneratorSpec>),
}

/// JSON form: `{d, k, D, pair, labels}` with `pair` in the three-line tree
/// pair text format and labels keyed by dom leaf.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GermJson {
    pub d: usize,
    pub k: usize,
    #[serde(rename = "D")]
    pub group: GroupSpec,
    pub pair: String,
    #[serde(default)]
    pub labels: BTreeMap<String, PortraitJson>,
}

impl GermJson {
    pub fn context(&self, cap: usize) -> Result<Arc<GermContext>> {
        let group = match &self.group {
            GroupSpec::Name(n) => catalog::builtin(n)?,
            GroupSpec::Generators(gens) => catalog::CatalogEntry {
                name: "D".into(),
                degree: self.d,
                generators: gens.clone(),
                tags: Vec::new(),
                point_labels: None,
            }
            .to_group(None)?,
        };
        if group.degree() != self.d {
            return Err(Error::DegreeMismatch {
                expected: self.d,
                found: group.degree(),
            });
        }
        GermContext::new(self.k, group, cap)
    }

    pub fn to_germ(&self, ctx: Arc<GermContext>) -> Result<GermElement> {
        let pair = TreePair::from_text(self.k, self.d, &self.pair)?;
        let mut labels = BTreeMap::new();
        for (key, pj) in &self.labels {
            let a: Address = key.parse()?;
            labels.insert(a, Portrait::try_from(pj.clone())?);
        }
        GermElement::new(ctx, &pair, &labels)
    }
}
