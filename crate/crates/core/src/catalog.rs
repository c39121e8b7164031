//! Group catalogs and built-in named groups.
//!
//! A catalog is a JSON array of entries
//! `{name, degree, generators, tags?, point_labels?}` where each generator
//! is a cycle string such as `"(0 1 2)(3 4)"` or an image array.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};
use crate::perm::{parse_cycle_list, Perm};
use crate::permgroup::PermGroup;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Cycles(String),
    Images(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub degree: usize,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    /// Original names of the points, when the group was given on some other
    /// set (a field, a projective line) and relabelled to `0..degree`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_labels: Option<Vec<String>>,
}

impl CatalogEntry {
    /// Builds the group. `source` is the raw catalog text, used only to
    /// locate a bad generator string for the error message.
    pub fn to_group(&self, source: Option<&str>) -> Result<PermGroup> {
        if self.degree == 0 {
            return Err(Error::Catalog(format!("entry {:?}: degree must be positive", self.name)));
        }
        let mut gens = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let perm = match g {
                GeneratorSpec::Images(images) => {
                    if images.len() != self.degree {
                        return Err(Error::DegreeMismatch {
                            expected: self.degree,
                            found: images.len(),
                        });
                    }
                    Perm::from_images(images.clone())?
                }
                GeneratorSpec::Cycles(text) => {
                    let (line, column) = source
                        .and_then(|s| locate(s, text))
                        .unwrap_or((1, 1));
                    let cycles = parse_cycle_list(text, line, column)?;
                    Perm::from_cycles(self.degree, &cycles)?
                }
            };
            gens.push(perm);
        }
        Ok(PermGroup::new(self.degree, gens)?.with_name(self.name.clone()))
    }

    pub fn from_group(group: &PermGroup, point_labels: Option<Vec<String>>) -> Self {
        CatalogEntry {
            name: group.display_name(),
            degree: group.degree(),
            generators: group
                .generators()
                .iter()
                .map(|g| GeneratorSpec::Cycles(g.to_cycle_string()))
                .collect(),
            tags: Vec::new(),
            point_labels,
        }
    }
}

/// Line and column (1-based) of the first character inside the quoted
/// occurrence of `needle` in `source`.
fn locate(source: &str, needle: &str) -> Option<(usize, usize)> {
    let quoted = format!("\"{needle}\"");
    let at = source.find(&quoted)? + 1;
    let before = &source[..at];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Some((line, column))
}

pub fn parse_catalog(text: &str) -> Result<Vec<CatalogEntry>> {
    let entries: Vec<CatalogEntry> = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: Location {
            line: e.line(),
            column: e.column(),
        },
        message: e.to_string(),
    })?;
    let mut names = HashSet::new();
    for e in &entries {
        if !names.insert(e.name.as_str()) {
            return Err(Error::Catalog(format!("duplicate entry name {:?}", e.name)));
        }
    }
    Ok(entries)
}

/// Parses an inline generator list such as `"(0 1 2),(0 1)"`. Commas between
/// cycles separate generators; the degree is the largest point plus one
/// unless given.
pub fn parse_inline(text: &str, degree: Option<usize>) -> Result<PermGroup> {
    let mut gens_cycles = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                gens_cycles.push((start, &text[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    gens_cycles.push((start, &text[start..]));
    let mut parsed = Vec::new();
    for (offset, part) in gens_cycles {
        let column = text[..offset].chars().count() + 1;
        parsed.push(parse_cycle_list(part, 1, column)?);
    }
    let max_point = parsed.iter().flatten().flatten().copied().max();
    let n = degree.unwrap_or_else(|| max_point.map_or(1, |m| m + 1));
    let gens = parsed
        .iter()
        .map(|cycles| Perm::from_cycles(n, cycles))
        .collect::<Result<Vec<_>>>()?;
    PermGroup::new(n, gens)
}

// Arithmetic in GF(8) = GF(2)[x]/(x^3 + x + 1), elements as 3-bit integers.
fn gf8_mul(a: usize, b: usize) -> usize {
    let mut acc = 0;
    for i in 0..3 {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    for bit in (3..5).rev() {
        if acc >> bit & 1 == 1 {
            acc ^= 0b1011 << (bit - 3);
        }
    }
    acc
}

/// `ζ = x`, a generator of GF(8)^×.
pub const ZETA: usize = 2;

pub fn gf8_pow(base: usize, e: usize) -> usize {
    (0..e).fold(1, |acc, _| gf8_mul(acc, base))
}

fn gf8_labels() -> Vec<String> {
    (0..8usize)
        .map(|v| {
            let mut terms = Vec::new();
            if v & 4 != 0 {
                terms.push("x^2".to_string());
            }
            if v & 2 != 0 {
                terms.push("x".to_string());
            }
            if v & 1 != 0 {
                terms.push("1".to_string());
            }
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join("+")
            }
        })
        .collect()
}

/// PSL(2,7) on GF(7) ∪ {∞}; points 0..6 are field elements, 7 is ∞.
/// Generators `z ↦ z+1` and `z ↦ −1/z`.
pub fn psl27() -> (PermGroup, Vec<String>) {
    let inf = 7;
    let shift: Vec<usize> = (0..8).map(|z| if z == inf { inf } else { (z + 1) % 7 }).collect();
    let inv = |z: usize| (1..7).find(|w| z * w % 7 == 1).expect("nonzero");
    let neg_inv: Vec<usize> = (0..8)
        .map(|z| match z {
            0 => inf,
            7 => 0,
            z => (7 - inv(z)) % 7,
        })
        .collect();
    let gens = vec![
        Perm::from_images(shift).unwrap(),
        Perm::from_images(neg_inv).unwrap(),
    ];
    let mut labels: Vec<String> = (0..7).map(|i| i.to_string()).collect();
    labels.push("inf".to_string());
    (PermGroup::new(8, gens).unwrap().with_name("PSL(2,7)"), labels)
}

/// AΓL(1,8) on GF(8): `x ↦ x+1`, `x ↦ ζx`, `x ↦ x²`.
pub fn agaml18() -> (PermGroup, Vec<String>) {
    let gens = vec![
        Perm::from_images((0..8).map(|x| x ^ 1).collect()).unwrap(),
        Perm::from_images((0..8).map(|x| gf8_mul(ZETA, x)).collect()).unwrap(),
        Perm::from_images((0..8).map(|x| gf8_mul(x, x)).collect()).unwrap(),
    ];
    (PermGroup::new(8, gens).unwrap().with_name("AΓL(1,8)"), gf8_labels())
}

/// AGL(1,8), without the Frobenius; used as a negative control.
pub fn agl18() -> (PermGroup, Vec<String>) {
    let gens = vec![
        Perm::from_images((0..8).map(|x| x ^ 1).collect()).unwrap(),
        Perm::from_images((0..8).map(|x| gf8_mul(ZETA, x)).collect()).unwrap(),
    ];
    (PermGroup::new(8, gens).unwrap().with_name("AGL(1,8)"), gf8_labels())
}

/// AGL(1,5) on GF(5): `x ↦ x+1`, `x ↦ 2x`.
pub fn agl15() -> PermGroup {
    let gens = vec![
        Perm::from_images((0..5).map(|x| (x + 1) % 5).collect()).unwrap(),
        Perm::from_images((0..5).map(|x| 2 * x % 5).collect()).unwrap(),
    ];
    PermGroup::new(5, gens).unwrap().with_name("AGL(1,5)")
}

/// The bijection `n ↦ ζ^n` from GF(7) to GF(8)^×, written between the
/// restricted stabilizer views: PSL(2,7) fixing ∞ acts on points 0..6
/// (= GF(7)), and AΓL(1,8) fixing 0 acts on points 0..6 where point `i` is
/// the field element `i+1`.
pub fn zeta_power_bijection() -> Perm {
    Perm::from_images((0..7).map(|n| gf8_pow(ZETA, n) - 1).collect()).unwrap()
}

fn parse_parametric(name: &str) -> Option<PermGroup> {
    let num = |prefixes: &[&str]| {
        prefixes.iter().find_map(|p| {
            let rest = name.strip_prefix(p)?;
            let rest = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rest);
            rest.parse::<usize>().ok().filter(|&n| n >= 1)
        })
    };
    if let Some(n) = num(&["Sym", "S"]) {
        return Some(PermGroup::symmetric(n));
    }
    if let Some(n) = num(&["Alt", "A"]) {
        return Some(PermGroup::alternating(n));
    }
    if let Some(n) = num(&["C"]) {
        return Some(PermGroup::cyclic(n));
    }
    None
}

/// A built-in group by name, with point labels when the points were
/// relabelled from another set.
pub fn builtin_with_labels(name: &str) -> Result<(PermGroup, Option<Vec<String>>)> {
    let key: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    let (g, labels) = match key.as_str() {
        "PSL(2,7)" | "PSL27" => {
            let (g, l) = psl27();
            (g, Some(l))
        }
        "AΓL(1,8)" | "AGammaL(1,8)" | "AGaL(1,8)" => {
            let (g, l) = agaml18();
            (g, Some(l))
        }
        "AGL(1,8)" => {
            let (g, l) = agl18();
            (g, Some(l))
        }
        "AGL(1,5)" => (agl15(), None),
        _ => (
            parse_parametric(&key).ok_or_else(|| Error::UnknownGroup(name.to_string()))?,
            None,
        ),
    };
    Ok((g, labels))
}

pub fn builtin(name: &str) -> Result<PermGroup> {
    Ok(builtin_with_labels(name)?.0)
}

/// Names accepted by [`builtin`] besides the parametric families.
pub const BUILTIN_NAMES: &[&str] = &[
    "C3", "S3", "S4", "A4", "A5", "PSL(2,7)", "AGL(1,5)", "AΓL(1,8)", "AGL(1,8)",
];

pub fn builtin_catalog() -> Vec<CatalogEntry> {
    BUILTIN_NAMES
        .iter()
        .map(|n| {
            let (g, labels) = builtin_with_labels(n).expect("built-in");
            let mut e = CatalogEntry::from_group(&g, labels);
            e.name = n.to_string();
            e.tags.push("builtin".to_string());
            e
        })
        .collect()
}
