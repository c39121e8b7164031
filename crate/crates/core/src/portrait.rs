//! Truncated tree automorphisms as labelled portraits.
//!
//! A portrait of depth `n` carries one permutation label per vertex at
//! levels `0..n`. Labels are indexed by the source vertex: the image of
//! `x_1 x_2 .. x_m` is `α_∅(x_1) α_{x_1}(x_2) ..`. Below the recorded depth
//! the portrait acts trivially, so portraits differing only by trailing
//! identity levels are equal.

use std::collections::{BTreeMap, HashSet};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::address::Address;
use crate::catalog::GeneratorSpec;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::{ElementSet, PermGroup, DEFAULT_SYM_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArityProfile {
    pub root_arity: usize,
    pub deep_arity: usize,
}

impl ArityProfile {
    pub fn new(root_arity: usize, deep_arity: usize) -> Result<Self> {
        if root_arity == 0 || deep_arity == 0 {
            return Err(Error::InvalidAddress(format!(
                "arity profile ({root_arity}, {deep_arity}) must be positive"
            )));
        }
        Ok(ArityProfile {
            root_arity,
            deep_arity,
        })
    }

    /// The `d`-regular rooted tree.
    pub fn regular(d: usize) -> Self {
        ArityProfile {
            root_arity: d,
            deep_arity: d,
        }
    }

    /// Arity of vertices at `level`.
    pub fn arity(&self, level: usize) -> usize {
        if level == 0 {
            self.root_arity
        } else {
            self.deep_arity
        }
    }

    /// Number of vertices at `level`.
    pub fn level_size(&self, level: usize) -> usize {
        (0..level).map(|l| self.arity(l)).product()
    }
}

#[derive(Clone)]
pub struct Portrait {
    profile: ArityProfile,
    /// `levels[m][i]` labels the `i`-th vertex of level `m` in planar order.
    levels: Vec<Vec<Perm>>,
}

impl Portrait {
    pub fn identity(profile: ArityProfile, depth: usize) -> Self {
        let levels = (0..depth)
            .map(|m| vec![Perm::identity(profile.arity(m)); profile.level_size(m)])
            .collect();
        Portrait { profile, levels }
    }

    pub fn from_levels(profile: ArityProfile, levels: Vec<Vec<Perm>>) -> Result<Self> {
        for (m, level) in levels.iter().enumerate() {
            if level.len() != profile.level_size(m) {
                return Err(Error::InvalidAddress(format!(
                    "level {m} has {} labels, expected {}",
                    level.len(),
                    profile.level_size(m)
                )));
            }
            for p in level {
                if p.degree() != profile.arity(m) {
                    return Err(Error::DegreeMismatch {
                        expected: profile.arity(m),
                        found: p.degree(),
                    });
                }
            }
        }
        Ok(Portrait { profile, levels })
    }

    /// Builds a portrait from explicit labels; omitted vertices get the
    /// identity.
    pub fn from_labels<I>(profile: ArityProfile, depth: usize, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Address, Perm)>,
    {
        let mut p = Portrait::identity(profile, depth);
        for (a, perm) in labels {
            if a.len() >= depth {
                return Err(Error::InvalidAddress(format!(
                    "label at {a:?} lies at or below depth {depth}"
                )));
            }
            p.set_label(&a, perm)?;
        }
        Ok(p)
    }

    pub fn profile(&self) -> ArityProfile {
        self.profile
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<Perm>] {
        &self.levels
    }

    fn check_address(&self, a: &Address) -> Result<()> {
        if a.fits(self.profile.root_arity, self.profile.deep_arity) {
            Ok(())
        } else {
            Err(Error::InvalidAddress(a.to_string()))
        }
    }

    /// Label at `a`, or `None` below the recorded depth (where it is the
    /// identity).
    pub fn label(&self, a: &Address) -> Option<&Perm> {
        if a.len() >= self.depth() || !a.fits(self.profile.root_arity, self.profile.deep_arity) {
            return None;
        }
        let i = a.level_index(self.profile.root_arity, self.profile.deep_arity);
        Some(&self.levels[a.len()][i])
    }

    /// Label at `a`, the identity below the recorded depth.
    pub fn label_or_identity(&self, a: &Address) -> Perm {
        self.label(a)
            .cloned()
            .unwrap_or_else(|| Perm::identity(self.profile.arity(a.len())))
    }

    pub fn root_label(&self) -> Perm {
        self.label_or_identity(&Address::root())
    }

    /// Sets a label, extending the depth with identity levels if needed.
    pub fn set_label(&mut self, a: &Address, perm: Perm) -> Result<()> {
        self.check_address(a)?;
        let arity = self.profile.arity(a.len());
        if perm.degree() != arity {
            return Err(Error::DegreeMismatch {
                expected: arity,
                found: perm.degree(),
            });
        }
        if a.len() >= self.depth() {
            *self = self.padded(a.len() + 1);
        }
        let i = a.level_index(self.profile.root_arity, self.profile.deep_arity);
        self.levels[a.len()][i] = perm;
        Ok(())
    }

    /// Non-identity labels in planar order, level by level.
    pub fn labels(&self) -> Vec<(Address, Perm)> {
        let mut out = Vec::new();
        for (m, level) in self.levels.iter().enumerate() {
            let addrs = Address::level(self.profile.root_arity, self.profile.deep_arity, m);
            for (a, p) in addrs.into_iter().zip(level) {
                if !p.is_identity() {
                    out.push((a, p.clone()));
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.levels.iter().flatten().all(|p| p.is_identity())
    }

    /// Depth after trimming trailing identity levels.
    pub fn effective_depth(&self) -> usize {
        let mut n = self.depth();
        while n > 0 && self.levels[n - 1].iter().all(|p| p.is_identity()) {
            n -= 1;
        }
        n
    }

    pub fn trimmed(&self) -> Portrait {
        Portrait {
            profile: self.profile,
            levels: self.levels[..self.effective_depth()].to_vec(),
        }
    }

    pub fn padded(&self, depth: usize) -> Portrait {
        let mut levels = self.levels.clone();
        for m in levels.len()..depth {
            levels.push(vec![Perm::identity(self.profile.arity(m)); self.profile.level_size(m)]);
        }
        Portrait {
            profile: self.profile,
            levels,
        }
    }

    /// Image of an address of length at most the depth.
    pub fn apply_address(&self, a: &Address) -> Result<Address> {
        self.check_address(a)?;
        if a.len() > self.depth() {
            return Err(Error::InvalidAddress(format!(
                "{a:?} is deeper than the portrait depth {}",
                self.depth()
            )));
        }
        Ok(Address(self.apply_path(a.symbols())))
    }

    /// Image of a path of any length; identity below the recorded depth.
    /// The path must fit the arity profile.
    pub fn apply_path(&self, path: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(path.len());
        let mut index = 0;
        for (m, &s) in path.iter().enumerate() {
            if m < self.depth() {
                out.push(self.levels[m][index].apply(s));
                index = index * self.profile.arity(m) + s;
            } else {
                out.push(s);
            }
        }
        out
    }

    /// Right-action product: apply `self`, then `other`.
    pub fn compose(&self, other: &Portrait) -> Result<Portrait> {
        if self.profile != other.profile {
            return Err(Error::ProfileMismatch);
        }
        let depth = self.depth().max(other.depth());
        let p = self.padded(depth);
        let q = other.padded(depth);
        let mut levels = Vec::with_capacity(depth);
        for m in 0..depth {
            let addrs = Address::level(self.profile.root_arity, self.profile.deep_arity, m);
            let level = addrs
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let image = Address(p.apply_path(a.symbols()));
                    let j = image.level_index(self.profile.root_arity, self.profile.deep_arity);
                    p.levels[m][i].then(&q.levels[m][j])
                })
                .collect();
            levels.push(level);
        }
        Ok(Portrait {
            profile: self.profile,
            levels,
        })
    }

    pub fn inverse(&self) -> Portrait {
        let mut inv = Portrait::identity(self.profile, self.depth());
        for m in 0..self.depth() {
            let addrs = Address::level(self.profile.root_arity, self.profile.deep_arity, m);
            for (i, a) in addrs.iter().enumerate() {
                let image = Address(self.apply_path(a.symbols()));
                let j = image.level_index(self.profile.root_arity, self.profile.deep_arity);
                inv.levels[m][j] = self.levels[m][i].inverse();
            }
        }
        inv
    }

    /// Conjugate `by⁻¹ · self · by`.
    pub fn conjugate_by(&self, by: &Portrait) -> Result<Portrait> {
        by.inverse().compose(self)?.compose(by)
    }

    /// Permutation induced on the vertices of `level`, indexed in planar
    /// order.
    pub fn level_perm(&self, level: usize) -> Perm {
        let addrs = Address::level(self.profile.root_arity, self.profile.deep_arity, level);
        let images = addrs
            .iter()
            .map(|a| Address(self.apply_path(a.symbols())).level_index(self.profile.root_arity, self.profile.deep_arity))
            .collect();
        Perm::from_images(images).expect("portraits act bijectively on each level")
    }

    /// Permutation induced on the deepest level.
    pub fn leaf_perm(&self) -> Perm {
        self.level_perm(self.depth())
    }

    pub fn is_w_portrait(&self, d_elements: &ElementSet) -> bool {
        self.levels.iter().flatten().all(|p| d_elements.contains(p))
    }

    /// Labels in `N`, and at every level below the root all labels lie in a
    /// single coset of `D`.
    pub fn is_a_portrait(&self, d_elements: &ElementSet, n_elements: &ElementSet) -> bool {
        if !self.levels.iter().flatten().all(|p| n_elements.contains(p)) {
            return false;
        }
        self.levels.iter().skip(1).all(|level| {
            let first_inv = level[0].inverse();
            level.iter().all(|p| d_elements.contains(&p.then(&first_inv)))
        })
    }

    /// The action on the subtree below vertex `v`, as a portrait of the
    /// `deep_arity`-regular tree. The root section is the portrait itself.
    pub fn section(&self, v: &Address) -> Portrait {
        if v.is_empty() {
            return self.clone();
        }
        let profile = ArityProfile::regular(self.profile.deep_arity);
        let depth = self.depth().saturating_sub(v.len());
        let mut levels = Vec::with_capacity(depth);
        for m in 0..depth {
            let level = Address::level(profile.root_arity, profile.deep_arity, m)
                .iter()
                .map(|w| {
                    let full = v.concat(w.symbols());
                    let i = full.level_index(self.profile.root_arity, self.profile.deep_arity);
                    self.levels[v.len() + m][i].clone()
                })
                .collect();
            levels.push(level);
        }
        Portrait { profile, levels }
    }

    /// Portrait of a regular tree with the given root label and child
    /// sections.
    pub fn from_root_and_children(root: Perm, children: &[Portrait]) -> Result<Portrait> {
        let d = root.degree();
        if children.len() != d {
            return Err(Error::DegreeMismatch {
                expected: d,
                found: children.len(),
            });
        }
        let profile = ArityProfile::regular(d);
        if children.iter().any(|c| c.profile != profile) {
            return Err(Error::ProfileMismatch);
        }
        let depth = 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0);
        let mut p = Portrait::identity(profile, depth);
        p.levels[0][0] = root;
        for (c, child) in children.iter().enumerate() {
            let child = child.padded(depth - 1);
            for m in 0..child.depth() {
                let width = profile.level_size(m);
                for (i, label) in child.levels[m].iter().enumerate() {
                    p.levels[m + 1][c * width + i] = label.clone();
                }
            }
        }
        Ok(p)
    }

    /// Restriction to the subtree below root child `i`, which the root label
    /// must fix.
    pub fn restrict_to_child(&self, i: usize) -> Result<Portrait> {
        if i >= self.profile.root_arity {
            return Err(Error::InvalidAddress(i.to_string()));
        }
        if !self.root_label().fixes(i) {
            return Err(Error::ChildNotFixed(i));
        }
        let mut s = self.section(&Address(vec![i]));
        if self.depth() == 0 {
            s = Portrait::identity(ArityProfile::regular(self.profile.deep_arity), 0);
        }
        Ok(s)
    }
}

impl PartialEq for Portrait {
    fn eq(&self, other: &Self) -> bool {
        let n = self.effective_depth();
        self.profile == other.profile && n == other.effective_depth() && self.levels[..n] == other.levels[..n]
    }
}

impl Eq for Portrait {}

impl Hash for Portrait {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.profile.hash(state);
        self.levels[..self.effective_depth()].hash(state);
    }
}

impl std::fmt::Debug for Portrait {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let labels: Vec<String> = self
            .labels()
            .iter()
            .map(|(a, p)| format!("{a:?}:{p}"))
            .collect();
        write!(
            f,
            "Portrait[{}x{}, depth {}; {}]",
            self.profile.root_arity,
            self.profile.deep_arity,
            self.depth(),
            labels.join(" ")
        )
    }
}

/// JSON form: `{profile: [r, a], depth, labels: {address: cycles|images}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortraitJson {
    pub profile: [usize; 2],
    pub depth: usize,
    #[serde(default)]
    pub labels: BTreeMap<String, GeneratorSpec>,
}

impl From<&Portrait> for PortraitJson {
    fn from(p: &Portrait) -> Self {
        PortraitJson {
            profile: [p.profile.root_arity, p.profile.deep_arity],
            depth: p.depth(),
            labels: p
                .labels()
                .into_iter()
                .map(|(a, perm)| (a.to_string(), GeneratorSpec::Cycles(perm.to_cycle_string())))
                .collect(),
        }
    }
}

impl TryFrom<PortraitJson> for Portrait {
    type Error = Error;

    fn try_from(j: PortraitJson) -> Result<Portrait> {
        let profile = ArityProfile::new(j.profile[0], j.profile[1])?;
        let mut labels = Vec::new();
        for (key, spec) in j.labels {
            let a: Address = key.parse()?;
            let arity = profile.arity(a.len());
            let perm = match spec {
                GeneratorSpec::Cycles(s) => Perm::parse_cycles(&s, arity)?,
                GeneratorSpec::Images(v) => Perm::from_images(v)?,
            };
            labels.push((a, perm));
        }
        Portrait::from_labels(profile, j.depth, labels)
    }
}

impl Serialize for Portrait {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PortraitJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Portrait {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = PortraitJson::deserialize(deserializer)?;
        Portrait::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Orders of the truncated wreath tower `W_n` and its normalizer tower `A_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerOrders {
    pub d: usize,
    pub n: usize,
    pub d_order: usize,
    pub normalizer_order: usize,
    /// `[N : D]`.
    pub index: usize,
    pub w_order: u128,
    pub a_order: u128,
    pub ratio: u128,
    /// Counts from exhaustive portrait enumeration, when run.
    pub exhaustive: Option<ExhaustiveOrders>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExhaustiveOrders {
    pub w_order: u128,
    pub a_order: u128,
}

impl TowerOrders {
    /// True when no exhaustive count was run or it agrees with the formula.
    pub fn consistent(&self) -> bool {
        self.exhaustive
            .is_none_or(|e| e.w_order == self.w_order && e.a_order == self.a_order)
    }
}

fn checked_pow(base: u128, exp: u128) -> Result<u128> {
    let exp = u32::try_from(exp).map_err(|_| Error::Overflow("exponent"))?;
    base.checked_pow(exp).ok_or(Error::Overflow("tower order"))
}

/// Tower orders from the recursions `|W_{m+1}| = |D|^{d^m} |W_m|` and
/// `|A_{m+1}| = |D|^{d^m} [N:D] |A_m|`, with `N` the normalizer of `D` in
/// `Sym(d)`. For `d ≤ 3`, `n ≤ 2` the counts are also obtained by
/// enumerating portraits.
pub fn tower_orders(d_group: &PermGroup, n: usize, cap: usize) -> Result<TowerOrders> {
    let d = d_group.degree();
    let d_order = d_group.order(cap)?;
    let normalizer_order = d_group.normalizer_in_sym(DEFAULT_SYM_DEGREE.max(d), cap)?.order;
    let index = normalizer_order / d_order;
    let (dd, idx) = (d_order as u128, index as u128);
    let mut w: u128 = 1;
    let mut a: u128 = 1;
    let mut width: u128 = 1;
    for _ in 0..n {
        let block = checked_pow(dd, width)?;
        w = w.checked_mul(block).ok_or(Error::Overflow("w_order"))?;
        a = a
            .checked_mul(block)
            .and_then(|x| x.checked_mul(idx))
            .ok_or(Error::Overflow("a_order"))?;
        width = width.checked_mul(d as u128).ok_or(Error::Overflow("level width"))?;
    }
    let ratio = a / w;
    debug_assert_eq!(ratio, checked_pow(idx, n as u128)?);
    let exhaustive = if d <= 3 && n <= 2 {
        Some(exhaustive_tower_orders(d_group, n, cap)?)
    } else {
        None
    };
    Ok(TowerOrders {
        d,
        n,
        d_order,
        normalizer_order,
        index,
        w_order: w,
        a_order: a,
        ratio,
        exhaustive,
    })
}

/// Counts depth-`n` portraits with labels in `N = N_Sym(d)(D)`, keeping the
/// W-portraits and the A-portraits. The count of candidates must not exceed
/// `cap`.
pub fn exhaustive_tower_orders(d_group: &PermGroup, n: usize, cap: usize) -> Result<ExhaustiveOrders> {
    let d = d_group.degree();
    let profile = ArityProfile::regular(d);
    let d_elements = d_group.enumerate(cap)?;
    let normalizer = d_group.normalizer_in_sym(DEFAULT_SYM_DEGREE.max(d), cap)?;
    let n_elements = normalizer.group.enumerate(cap)?;
    let vertices: usize = (0..n).map(|m| profile.level_size(m)).sum();
    let total = (n_elements.len() as u128)
        .checked_pow(vertices as u32)
        .ok_or(Error::OrderExceedsCap(cap))?;
    if total > cap as u128 {
        return Err(Error::OrderExceedsCap(cap));
    }
    let pool = n_elements.as_slice();
    let mut digits = vec![0usize; vertices];
    let (mut w, mut a) = (0u128, 0u128);
    loop {
        let mut it = digits.iter();
        let levels: Vec<Vec<Perm>> = (0..n)
            .map(|m| {
                (0..profile.level_size(m))
                    .map(|_| pool[*it.next().expect("digit per vertex")].clone())
                    .collect()
            })
            .collect();
        let p = Portrait { profile, levels };
        if p.is_w_portrait(&d_elements) {
            w += 1;
        }
        if p.is_a_portrait(&d_elements, &n_elements) {
            a += 1;
        }
        let mut k = 0;
        loop {
            if k == vertices {
                return Ok(ExhaustiveOrders { w_order: w, a_order: a });
            }
            digits[k] += 1;
            if digits[k] < pool.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Single-label W-portraits: one generator of `D` at one vertex of a level
/// below `n`. They generate the depth-`n` W-portraits.
pub fn w_generators(d_group: &PermGroup, n: usize) -> Vec<Portrait> {
    let profile = ArityProfile::regular(d_group.degree());
    let mut out = Vec::new();
    for m in 0..n {
        for (i, _) in Address::level(profile.root_arity, profile.deep_arity, m).iter().enumerate() {
            for g in d_group.generators() {
                let mut p = Portrait::identity(profile, n);
                p.levels[m][i] = g.clone();
                out.push(p);
            }
        }
    }
    out
}

/// True iff depth-`n` W-portraits act transitively on level `n`.
pub fn level_transitive_check(d_group: &PermGroup, n: usize, cap: usize) -> Result<bool> {
    let profile = ArityProfile::regular(d_group.degree());
    let size = profile.level_size(n);
    if size > cap {
        return Err(Error::OrderExceedsCap(cap));
    }
    let gens: Vec<Perm> = w_generators(d_group, n).iter().map(|p| p.leaf_perm()).collect();
    let group = PermGroup::new(size, gens)?;
    Ok(group.is_transitive())
}

/// Distinct leaf permutations of a portrait set; used to check that a set
/// of portraits acts faithfully.
pub fn distinct_leaf_perms<'a>(portraits: impl IntoIterator<Item = &'a Portrait>) -> usize {
    portraits
        .into_iter()
        .map(|p| p.leaf_perm())
        .collect::<HashSet<_>>()
        .len()
}
