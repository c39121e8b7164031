use std::fs;
use std::io::Read;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use treecomm::burger_mozes::{self, CenterKind};
use treecomm::catalog::{self, CatalogEntry};
use treecomm::germ::{GermContext, GermElement, GermJson};
use treecomm::permgroup::DEFAULT_SYM_DEGREE;
use treecomm::portrait;
use treecomm::sample;
use treecomm::treepair::TreePair;
use treecomm::{Error, PermGroup};

use crate::output::{record, table, Format};

pub struct Settings {
    pub format: Format,
    pub cap: usize,
    pub seed: u64,
    pub timing: bool,
}

/// Rendered output and whether any batch entry failed.
pub struct Outcome {
    pub text: String,
    pub failed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, failed: false }
    }
}

pub fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

/// Parsed entries of a catalog file; a malformed entry becomes an error row.
fn load_catalog(path: &Path) -> Result<Vec<(String, Result<PermGroup, Error>)>> {
    let text = read_input(path)?;
    let entries = catalog::parse_catalog(&text).with_context(|| format!("in catalog {}", path.display()))?;
    Ok(entries
        .iter()
        .map(|e| (e.name.clone(), e.to_group(Some(&text)).map(|g| g.with_name(e.name.clone()))))
        .collect())
}

fn timed<T>(settings: &Settings, f: impl FnOnce() -> T) -> (T, Option<u128>) {
    let start = Instant::now();
    let value = f();
    (value, settings.timing.then(|| start.elapsed().as_millis()))
}

fn finish_row(mut row: Value, name: &str, elapsed: Option<u128>) -> Value {
    let obj = row.as_object_mut().expect("object row");
    obj.insert("name".into(), json!(name));
    if let Some(ms) = elapsed {
        obj.insert("elapsed_ms".into(), json!(ms as u64));
    }
    row
}

fn error_row(name: &str, e: &dyn std::fmt::Display, elapsed: Option<u128>) -> Value {
    finish_row(json!({ "error": e.to_string() }), name, elapsed)
}

fn with_timing_column<'a>(settings: &Settings, mut columns: Vec<&'a str>) -> Vec<&'a str> {
    if settings.timing {
        columns.push("elapsed_ms");
    }
    columns.push("error");
    columns
}

fn group_row(g: &PermGroup, cap: usize) -> Result<Value, Error> {
    let orbits: Vec<String> = g
        .orbits()
        .iter()
        .map(|o| format!("{{{}}}", o.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    let transitive = g.is_transitive();
    let primitive = if transitive { Some(g.is_primitive()?) } else { None };
    let normalizer_order = if g.degree() <= DEFAULT_SYM_DEGREE {
        Some(g.normalizer_in_sym(DEFAULT_SYM_DEGREE, cap)?.order)
    } else {
        None
    };
    let flags = g.structure_flags(cap)?;
    Ok(json!({
        "degree": g.degree(),
        "order": flags.order,
        "orbits": orbits.join(" "),
        "transitive": transitive,
        "transitivity_degree": g.transitivity_degree(cap)?,
        "primitive": primitive,
        "normalizer_order": normalizer_order,
        "derived_order": flags.derived_order,
        "perfect": flags.is_perfect,
        "in_alternating": flags.in_alternating,
        "no_global_fixed_point": flags.no_global_fixed_point,
        "semiregular": flags.semiregular,
    }))
}

const GROUP_COLUMNS: &[&str] = &[
    "name",
    "degree",
    "order",
    "orbits",
    "transitive",
    "transitivity_degree",
    "primitive",
    "normalizer_order",
    "derived_order",
    "perfect",
    "in_alternating",
    "no_global_fixed_point",
    "semiregular",
];

pub fn group(settings: &Settings, inline: Option<&str>, degree: Option<usize>, catalog_path: Option<&Path>) -> Result<Outcome> {
    let entries = match (inline, catalog_path) {
        (Some(text), _) => {
            let g = catalog::parse_inline(text, degree).context("in --inline generators")?;
            vec![("inline".to_string(), Ok(g))]
        }
        (None, Some(path)) => load_catalog(path)?,
        (None, None) => bail!("one of --inline or --catalog is required"),
    };
    let rows: Vec<(Value, bool)> = entries
        .par_iter()
        .map(|(name, g)| {
            let (row, elapsed) = timed(settings, || g.clone().and_then(|g| group_row(&g, settings.cap)));
            match row {
                Ok(row) => (finish_row(row, name, elapsed), false),
                Err(e) => (error_row(name, &e, elapsed), true),
            }
        })
        .collect();
    let failed = rows.iter().any(|(_, f)| *f);
    let rows: Vec<Value> = rows.into_iter().map(|(r, _)| r).collect();
    let columns = with_timing_column(settings, GROUP_COLUMNS.to_vec());
    Ok(Outcome {
        text: table(settings.format, &columns, &rows, Map::new()),
        failed,
    })
}

const AUDIT_COLUMNS: &[&str] = &[
    "name",
    "degree",
    "order",
    "bm_admissible",
    "locally_primitive",
    "two_transitive",
    "f0_order",
    "f0_normalizer_order",
    "f0_self_normalizing",
    "f0_perfect",
    "f0_in_alt",
    "predicted_compactly_generated",
    "predicted_commensurator_index",
    "notes",
];

pub const DEFAULT_AUDIT_GROUPS: &[&str] = &["S3", "S4", "S5", "A4", "A5", "AGL(1,5)", "PSL(2,7)", "AΓL(1,8)"];

pub fn audit(settings: &Settings, catalog_path: Option<&Path>, names: &[String]) -> Result<Outcome> {
    let entries: Vec<(String, Result<PermGroup, Error>)> = match catalog_path {
        Some(path) => load_catalog(path)?,
        None => {
            let names: Vec<String> = if names.is_empty() {
                DEFAULT_AUDIT_GROUPS.iter().map(|s| s.to_string()).collect()
            } else {
                names.to_vec()
            };
            names.iter().map(|n| (n.clone(), catalog::builtin(n))).collect()
        }
    };
    let rows: Vec<(Value, Option<bool>, bool)> = entries
        .par_iter()
        .map(|(name, g)| {
            let (row, elapsed) = timed(settings, || {
                g.clone()
                    .and_then(|g| burger_mozes::audit_theorems(&g, DEFAULT_SYM_DEGREE, settings.cap))
            });
            match row {
                Ok(r) => {
                    let verdict = r.f0_self_normalizing;
                    let mut v = serde_json::to_value(&r).expect("serializable");
                    let notes = if r.two_transitive {
                        "F_0 is the stabilizer of point 0 acting on the remaining points"
                    } else {
                        "not 2-transitive: self-normalization condition not applicable"
                    };
                    v["notes"] = json!(notes);
                    (finish_row(v, name, elapsed), verdict, false)
                }
                Err(e) => (error_row(name, &e, elapsed), None, true),
            }
        })
        .collect();
    let applicable = rows.iter().filter(|(_, v, _)| v.is_some()).count();
    let passing = rows.iter().filter(|(_, v, _)| *v == Some(true)).count();
    let errors = rows.iter().filter(|(_, _, e)| *e).count();
    let mut extra = Map::new();
    extra.insert(
        "summary".into(),
        json!(format!("F_0 self-normalizing for {passing}/{applicable} applicable entries")),
    );
    extra.insert("passing".into(), json!(passing));
    extra.insert("applicable".into(), json!(applicable));
    extra.insert("errors".into(), json!(errors));
    let rows: Vec<Value> = rows.into_iter().map(|(r, _, _)| r).collect();
    let columns = with_timing_column(settings, AUDIT_COLUMNS.to_vec());
    Ok(Outcome {
        text: table(settings.format, &columns, &rows, extra),
        failed: errors > 0,
    })
}

fn check(name: &str, expected: String, observed: String, pass: bool) -> Value {
    json!({ "check": name, "expected": expected, "observed": observed, "pass": pass })
}

/// Compares PSL(2,7) on the projective line over GF(7) with AΓL(1,8) on
/// GF(8). With `perturbed` the second group is replaced by AGL(1,8).
pub fn example_psl_agl(settings: &Settings, perturbed: bool) -> Result<Outcome> {
    let cap = settings.cap;
    let (g1, labels1) = catalog::psl27();
    let (g2, labels2) = if perturbed { catalog::agl18() } else { catalog::agaml18() };
    let (n1, n2) = (g1.display_name(), g2.display_name());
    let (o1, o2) = (g1.order(cap)?, g2.order(cap)?);
    let (t1, t2) = (g1.transitivity_degree(cap)?, g2.transitivity_degree(cap)?);
    // PSL(2,7) fixes ∞ (point 7); AΓL(1,8) fixes the field element 0.
    let s1 = g1.point_stabilizer(7, cap)?;
    let s2 = g2.point_stabilizer(0, cap)?;
    let (so1, so2) = (s1.restricted.order(cap)?, s2.restricted.order(cap)?);
    let found = s1.restricted.permutation_equivalence(&s2.restricted, cap)?;
    let beta = catalog::zeta_power_bijection();
    let beta_ok = s1.restricted.verify_equivalence(&s2.restricted, &beta, cap)?;
    let isomorphic = g1.is_abstractly_isomorphic(&g2, cap)?;
    let (f1, f2) = (g1.structure_flags(cap)?, g2.structure_flags(cap)?);

    let checks = vec![
        check("orders", "168 and 168".into(), format!("{o1} and {o2}"), o1 == 168 && o2 == 168),
        check(
            "transitivity_degree",
            "2 and 2".into(),
            format!("{t1} and {t2}"),
            t1 == 2 && t2 == 2,
        ),
        check(
            "point_stabilizer_orders",
            "21 and 21".into(),
            format!("{so1} and {so2}"),
            so1 == 21 && so2 == 21,
        ),
        check(
            "stabilizers_permutation_equivalent",
            "witness found; n ↦ ζ^n verifies".into(),
            format!(
                "witness {}; n ↦ ζ^n {}",
                if found.is_some() { "found" } else { "not found" },
                if beta_ok { "verifies" } else { "fails" }
            ),
            found.is_some() && beta_ok,
        ),
        check(
            "groups_not_isomorphic",
            "not isomorphic; exactly one perfect".into(),
            format!(
                "{}; perfect: {} {}, {} {}",
                if isomorphic { "isomorphic" } else { "not isomorphic" },
                n1,
                f1.is_perfect,
                n2,
                f2.is_perfect
            ),
            !isomorphic && f1.is_perfect != f2.is_perfect,
        ),
    ];
    let all_pass = checks.iter().all(|c| c["pass"] == json!(true));
    // Stabilizer point i stands for GF(7) element i and for GF(8) element i + 1.
    let beta_table: Vec<Value> = (0..7)
        .map(|i| json!({ "from": labels1[i], "to": labels2[beta.apply(i) + 1] }))
        .collect();
    let verdict = if all_pass {
        format!(
            "the universal groups U(F)^+ for F = {n1} and F' = {n2} are locally isomorphic but not isomorphic"
        )
    } else {
        "the comparison does not go through: see the failing checks".to_string()
    };
    let text = match settings.format {
        Format::Json => record(
            Format::Json,
            &json!({
                "groups": [n1, n2],
                "checks": checks,
                "beta_images": beta.images(),
                "beta_table": beta_table,
                "witness": found.as_ref().map(|e| e.bijection.images().to_vec()),
                "all_pass": all_pass,
                "verdict": verdict,
            }),
        ),
        Format::Tsv => {
            let mut s = table(Format::Tsv, &["check", "expected", "observed", "pass"], &checks, Map::new());
            let pairs: Vec<String> = beta_table
                .iter()
                .map(|e| format!("{}->{}", e["from"].as_str().unwrap(), e["to"].as_str().unwrap()))
                .collect();
            s.push_str(&format!("# beta\t{}\n# all_pass\t{all_pass}\n# verdict\t{verdict}\n", pairs.join(" ")));
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn big(x: u128) -> Value {
    u64::try_from(x).map(|v| json!(v)).unwrap_or_else(|_| json!(x.to_string()))
}

pub fn tower(settings: &Settings, d: usize, group_name: &str, n: usize) -> Result<Outcome> {
    let g = catalog::builtin(group_name)?;
    if g.degree() != d {
        bail!("{} has degree {}, not {d}", g.display_name(), g.degree());
    }
    let t = portrait::tower_orders(&g, n, settings.cap)?;
    let value = json!({
        "d": t.d,
        "D": g.display_name(),
        "n": t.n,
        "d_order": t.d_order,
        "normalizer_order": t.normalizer_order,
        "index": t.index,
        "w": big(t.w_order),
        "a": big(t.a_order),
        "ratio": big(t.ratio),
        "exhaustive_w": t.exhaustive.map(|e| big(e.w_order)),
        "exhaustive_a": t.exhaustive.map(|e| big(e.a_order)),
        "consistent": t.consistent(),
    });
    Ok(Outcome {
        text: record(settings.format, &value),
        failed: !t.consistent(),
    })
}

pub fn ball(settings: &Settings, f_name: &str, radius: usize, edge: bool, independence: bool, recover: bool) -> Result<Outcome> {
    let f = catalog::builtin(f_name)?;
    let cap = settings.cap;
    let kind = if edge || independence || recover { CenterKind::Edge } else { CenterKind::Vertex };
    let group = burger_mozes::build_ball_group(&f, radius, kind, cap)?;
    let mut value = json!({
        "F": f.display_name(),
        "d": f.degree(),
        "R": radius,
        "center": if kind == CenterKind::Edge { "edge" } else { "vertex" },
        "ball_vertices": group.ball.len(),
        "group_order": group.order(),
    });
    if kind == CenterKind::Vertex {
        value["predicted_order"] = big(burger_mozes::predicted_vertex_ball_order(&f, radius, cap)?);
    }
    let mut failed = false;
    if independence {
        let r = burger_mozes::tits_report(&group);
        failed |= !r.factorizes;
        value["independence"] = serde_json::to_value(&r)?;
    }
    if recover {
        let r = burger_mozes::recover_local_action(&group, cap)?;
        let verdict = if r.equivalence.is_some() {
            format!("recovered ≅ {}", f.display_name())
        } else {
            format!("recovered group of order {} is not equivalent to {}", r.quotient_order, f.display_name())
        };
        failed |= r.equivalence.is_none();
        let mut rv = serde_json::to_value(&r)?;
        rv["verdict"] = json!(verdict);
        value["recovery"] = rv;
    }
    let text = match settings.format {
        Format::Json => record(Format::Json, &value),
        Format::Tsv => record(Format::Tsv, &flatten(&value)),
    };
    Ok(Outcome { text, failed })
}

/// Nested objects become dotted keys, for `key<TAB>value` output.
fn flatten(v: &Value) -> Value {
    fn go(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    go(&key, x, out);
                }
            }
            other => {
                out.insert(prefix.to_string(), other.clone());
            }
        }
    }
    let mut out = Map::new();
    go("", v, &mut out);
    Value::Object(out)
}

fn read_pair(k: usize, d: usize, path: &Path) -> Result<TreePair> {
    let text = read_input(path)?;
    TreePair::from_text(k, d, &text).with_context(|| format!("in tree pair {}", path.display()))
}

fn pair_output(settings: &Settings, p: &TreePair) -> String {
    match settings.format {
        Format::Tsv => p.to_text(),
        Format::Json => record(
            Format::Json,
            &json!({ "k": p.k(), "d": p.d(), "text": p.to_text(), "pair": p }),
        ),
    }
}

pub fn thompson_reduce(settings: &Settings, k: usize, d: usize, path: &Path) -> Result<Outcome> {
    let p = read_pair(k, d, path)?;
    Ok(Outcome::ok(pair_output(settings, &p.reduce())))
}

pub fn thompson_compose(settings: &Settings, k: usize, d: usize, first: &Path, second: &Path) -> Result<Outcome> {
    let a = read_pair(k, d, first)?;
    let b = read_pair(k, d, second)?;
    Ok(Outcome::ok(pair_output(settings, &a.compose(&b)?)))
}

pub fn thompson_parity(settings: &Settings, k: usize, d: usize, path: &Path, max_steps: usize) -> Result<Outcome> {
    let p = read_pair(k, d, path)?;
    let parity = p.parity();
    let witness = if parity.representative_dependent {
        p.sign_flip_witness(max_steps).map(|w| w.to_text())
    } else {
        None
    };
    let value = json!({
        "sign": if parity.sign.bit() == 0 { "even" } else { "odd" },
        "representative_dependent": parity.representative_dependent,
        "witness": witness,
    });
    Ok(Outcome::ok(record(settings.format, &value)))
}

pub fn thompson_random(settings: &Settings, k: usize, d: usize, expansions: usize) -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(settings.seed);
    let p = sample::random_pair(&mut rng, k, d, expansions);
    Ok(Outcome::ok(pair_output(settings, &p)))
}

fn read_germ(settings: &Settings, path: &Path) -> Result<GermElement> {
    let text = read_input(path)?;
    let json: GermJson = serde_json::from_str(&text).with_context(|| format!("in germ {}", path.display()))?;
    let ctx = json.context(settings.cap)?;
    Ok(json.to_germ(ctx)?)
}

const SCOPE: &str = "computed in the finitely supported layer";

pub fn germ_factor(settings: &Settings, path: &Path) -> Result<Outcome> {
    let g = read_germ(settings, path)?;
    let (f, a) = g.factor_fa()?;
    let reconstructs = GermElement::lift(g.context().clone(), &f)?.compose(&a)? == g;
    let in_a = a.membership().in_a;
    let value = json!({
        "f": f.to_text(),
        "a": a.to_json(),
        "in_F": f.is_order_preserving(),
        "in_A": in_a,
        "f_is_identity": f.is_identity(),
        "a_is_identity": a.is_identity(),
        "reconstructs": reconstructs,
        "scope": SCOPE,
    });
    Ok(Outcome {
        text: record(settings.format, &value),
        failed: !(reconstructs && in_a),
    })
}

pub fn germ_chi(settings: &Settings, path: &Path) -> Result<Outcome> {
    let g = read_germ(settings, path)?;
    let chi = g.chi_sign();
    let value = json!({ "chi": chi.value, "level": chi.level, "note": chi.note, "scope": SCOPE });
    Ok(Outcome::ok(record(settings.format, &value)))
}

pub fn germ_in_m(settings: &Settings, path: &Path) -> Result<Outcome> {
    let g = read_germ(settings, path)?;
    let m = g.in_m();
    let value = json!({ "in_M": m.in_m, "rationale": m.rationale, "scope": SCOPE });
    Ok(Outcome::ok(record(settings.format, &value)))
}

pub fn germ_membership(settings: &Settings, path: &Path) -> Result<Outcome> {
    let g = read_germ(settings, path)?;
    let mut value = serde_json::to_value(g.membership())?;
    value["scope"] = json!(SCOPE);
    Ok(Outcome::ok(record(settings.format, &value)))
}

pub fn germ_random(
    settings: &Settings,
    k: usize,
    group_name: &str,
    expansions: usize,
    label_depth: usize,
) -> Result<Outcome> {
    let group = catalog::builtin(group_name)?;
    let ctx = GermContext::new(k, group, settings.cap)?;
    let mut rng = StdRng::seed_from_u64(settings.seed);
    let g = sample::random_germ(&mut rng, &ctx, expansions, label_depth, settings.cap);
    let mut json = g.to_json();
    json.group = treecomm::germ::GroupSpec::Name(group_name.to_string());
    Ok(Outcome::ok(record(Format::Json, &serde_json::to_value(&json)?)))
}

/// The built-in catalog as JSON, a starting point for custom catalogs.
pub fn builtin_catalog() -> Result<Outcome> {
    let entries: Vec<CatalogEntry> = catalog::builtin_catalog();
    Ok(Outcome::ok(record(Format::Json, &serde_json::to_value(&entries)?)))
}
