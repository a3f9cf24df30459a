//! Weyl-level certificates of condition (wc) for affine rank-3 types: every
//! positive root `γ` with `o(s r_γ) = ∞` sits strictly inside the fan of
//! positive roots through a vertex whose other roots have finite order with `s`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coxeter::{CoxeterSystem, Order, Root, WeylElement, WeylTable};
use crate::error::{domain, structural, Result};

pub const AFFINE_TYPES: [&str; 3] = ["~A2", "~C2", "~G2"];
pub const DEFAULT_DEPTH: usize = 20;

/// A positive root with its depth and a word `t_1 ⋯ t_k` such that the root
/// equals `s_{t_1} ⋯ s_{t_k} α_base` with `k = depth − 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthRoot {
    pub root: Root,
    pub depth: usize,
    pub word: Vec<usize>,
    pub base: usize,
}

fn affine_system(name: &str) -> Result<Arc<CoxeterSystem>> {
    if !AFFINE_TYPES.contains(&name) {
        return Err(domain(format!(
            "unsupported affine type {name:?}; known: {}",
            AFFINE_TYPES.join(", ")
        )));
    }
    CoxeterSystem::named(name)
}

/// Positive roots of depth at most `depth`, ordered by depth then coordinates.
pub fn enumerate_positive_roots(sys: &Arc<CoxeterSystem>, depth: usize) -> Result<Vec<DepthRoot>> {
    if depth == 0 {
        return Err(domain("depth must be at least 1"));
    }
    let mut seen: HashMap<Root, usize> = HashMap::new();
    let mut out: Vec<DepthRoot> = Vec::new();
    let mut layer: Vec<DepthRoot> = (0..sys.rank())
        .map(|t| DepthRoot {
            root: sys.simple_root(t),
            depth: 1,
            word: Vec::new(),
            base: t,
        })
        .collect();
    for d in 1..=depth {
        layer.sort_by(|a, b| a.root.coords().cmp(b.root.coords()));
        for r in &layer {
            seen.insert(r.root.clone(), out.len());
            out.push(r.clone());
        }
        if d == depth {
            break;
        }
        let mut next: BTreeMap<Vec<i64>, DepthRoot> = BTreeMap::new();
        for r in &layer {
            for t in 0..sys.rank() {
                if sys.pairing(r.root.coords(), &sys.simple_root(t))? >= 0 {
                    continue;
                }
                let up = sys.reflect(&sys.simple_root(t), &r.root)?;
                if seen.contains_key(&up) {
                    continue;
                }
                next.entry(up.coords().to_vec()).or_insert_with(|| {
                    let mut word = vec![t];
                    word.extend(&r.word);
                    DepthRoot {
                        root: up.clone(),
                        depth: d + 1,
                        word,
                        base: r.base,
                    }
                });
            }
        }
        layer = next.into_values().collect();
    }
    Ok(out)
}

fn order_with(sys: &CoxeterSystem, a: &Root, b: &Root) -> Result<Order> {
    if a == b || *a == b.negated() {
        return Ok(Order::Finite(1));
    }
    sys.reflection_product_order(a, b)
}

/// The positive roots of the dihedral subsystem on `{a, b}` in convex order
/// from `α_a` to `α_b`, mapped by `d`.
fn dihedral_fan(
    sys: &Arc<CoxeterSystem>,
    d: &WeylElement,
    a: usize,
    b: usize,
) -> Result<Vec<Root>> {
    let m = match sys.matrix().m(a, b) {
        Order::Finite(m) => m as usize,
        Order::Infinite => return Err(structural("vertex residue of infinite type")),
    };
    let mut w = sys.identity();
    let mut fan = Vec::with_capacity(m);
    for j in 0..m {
        let g = if j % 2 == 0 { a } else { b };
        fan.push(d.act(&w.act(&sys.simple_root(g))?)?);
        w = w.times_gen(g);
    }
    Ok(fan)
}

/// The fan through the vertex of the rank-2 residue reached by a minimal
/// gallery whose last step crosses the wall of `gamma`, and the 1-based
/// position of `gamma` in it.
pub fn build_vertex_fan(
    sys: &Arc<CoxeterSystem>,
    s: usize,
    gamma: &DepthRoot,
) -> Result<(Vec<Root>, usize)> {
    if order_with(sys, &gamma.root, &sys.simple_root(s))? != Order::Infinite {
        return Err(domain(format!(
            "{} has finite order with s{}; no fan is needed",
            gamma.root,
            s + 1
        )));
    }
    let Some(&last) = gamma.word.last() else {
        return Err(structural(
            "a simple root cannot have infinite order with a generator",
        ));
    };
    let w = sys.from_word(&gamma.word)?;
    let (a, b) = (last, gamma.base);
    let mut d = w;
    while let Some(x) = [a, b].into_iter().find(|&x| d.has_right_descent(x)) {
        d = d.times_gen(x);
    }
    let fan = dihedral_fan(sys, &d, a, b)?;
    let pos = fan
        .iter()
        .position(|r| *r == gamma.root)
        .ok_or_else(|| structural(format!("{} is not in the fan of its vertex", gamma.root)))?;
    Ok((fan, pos + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertEntry {
    pub gamma: Root,
    /// The two boundary roots of the fan, sorted.
    pub vertex: [Root; 2],
    pub fan: Vec<Root>,
    /// 1-based position of `gamma` in `fan`.
    pub ell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WcCertificate {
    #[serde(rename = "type")]
    pub affine_type: String,
    pub s: usize,
    pub depth: usize,
    pub entries: Vec<CertEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertFailure {
    pub gamma: Root,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertOutcome {
    pub certificate: WcCertificate,
    pub failures: Vec<CertFailure>,
}

fn vertex_of(fan: &[Root]) -> [Root; 2] {
    let (x, y) = (fan[0].clone(), fan[fan.len() - 1].clone());
    if x.coords() <= y.coords() {
        [x, y]
    } else {
        [y, x]
    }
}

/// Builds the certificate for generator `s` over all positive roots of depth
/// at most `depth`.
pub fn generate_certificate(affine_type: &str, s: usize, depth: usize) -> Result<CertOutcome> {
    let sys = affine_system(affine_type)?;
    if s >= sys.rank() {
        return Err(domain(format!("generator index {s} out of range")));
    }
    let roots = enumerate_positive_roots(&sys, depth)?;
    let alpha = sys.simple_root(s);
    let needed: Vec<&DepthRoot> = roots
        .iter()
        .filter(|r| matches!(order_with(&sys, &r.root, &alpha), Ok(Order::Infinite)))
        .collect();
    let results: Vec<std::result::Result<CertEntry, CertFailure>> = needed
        .par_iter()
        .map(|g| {
            let fail = |reason: String| CertFailure {
                gamma: g.root.clone(),
                reason,
            };
            let (fan, ell) = build_vertex_fan(&sys, s, g).map_err(|e| fail(e.to_string()))?;
            if ell == 1 || ell == fan.len() {
                return Err(fail(format!(
                    "γ is a boundary root of its fan (ℓ = {ell}, m = {})",
                    fan.len()
                )));
            }
            for (i, r) in fan.iter().enumerate() {
                if i + 1 != ell && !matches!(order_with(&sys, r, &alpha), Ok(Order::Finite(_))) {
                    return Err(fail(format!(
                        "fan root {r} has infinite order with s{}",
                        s + 1
                    )));
                }
            }
            Ok(CertEntry {
                gamma: g.root.clone(),
                vertex: vertex_of(&fan),
                fan,
                ell,
            })
        })
        .collect();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(e) => entries.push(e),
            Err(f) => failures.push(f),
        }
    }
    Ok(CertOutcome {
        certificate: WcCertificate {
            affine_type: affine_type.to_string(),
            s,
            depth,
            entries,
        },
        failures,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub accepted: bool,
    pub entries: usize,
    pub problems: Vec<String>,
}

/// Writes `x = a·p + b·q` with rational `a, b` solved from two coordinates.
fn cone_coefficients(x: &[i64], p: &[i64], q: &[i64]) -> Option<(i64, i64)> {
    let n = x.len();
    for i in 0..n {
        for j in i + 1..n {
            let det = p[i] * q[j] - p[j] * q[i];
            if det == 0 {
                continue;
            }
            let an = x[i] * q[j] - x[j] * q[i];
            let bn = p[i] * x[j] - p[j] * x[i];
            if an % det != 0 || bn % det != 0 {
                return None;
            }
            let (a, b) = (an / det, bn / det);
            return (0..n)
                .all(|k| a * p[k] + b * q[k] == x[k])
                .then_some((a, b));
        }
    }
    None
}

/// Re-verifies a certificate from scratch: coverage against the roots of a
/// ball in `W`, and for every entry the fan shape, the position of `γ` and
/// the order conditions.
pub fn verify_certificate(cert: &WcCertificate) -> VerifyReport {
    let mut problems = Vec::new();
    let sys = match affine_system(&cert.affine_type) {
        Ok(s) => s,
        Err(e) => {
            return VerifyReport {
                accepted: false,
                entries: cert.entries.len(),
                problems: vec![e.to_string()],
            };
        }
    };
    if cert.s >= sys.rank() || cert.depth == 0 {
        problems.push(format!("bad generator {} or depth {}", cert.s, cert.depth));
        return VerifyReport {
            accepted: false,
            entries: cert.entries.len(),
            problems,
        };
    }
    let alpha = sys.simple_root(cert.s);
    let infinite = |r: &Root| matches!(order_with(&sys, r, &alpha), Ok(Order::Infinite));

    let expected: BTreeSet<Vec<i64>> = roots_from_ball(&sys, cert.depth)
        .into_iter()
        .filter(|c| Root::new(c.clone()).map(|r| infinite(&r)).unwrap_or(false))
        .collect();
    let mut covered: BTreeSet<Vec<i64>> = BTreeSet::new();
    for (k, e) in cert.entries.iter().enumerate() {
        let mut bad = |msg: String| problems.push(format!("entry {k} ({}): {msg}", e.gamma));
        if !covered.insert(e.gamma.coords().to_vec()) {
            bad("duplicate entry".into());
        }
        if !e.gamma.is_positive() || !infinite(&e.gamma) {
            bad("γ is not a positive root of infinite order with s".into());
        }
        let m = e.fan.len();
        if m < 3 {
            bad(format!("fan of size {m}"));
            continue;
        }
        let (first, last) = (&e.fan[0], &e.fan[m - 1]);
        if e.vertex != vertex_of(&e.fan) {
            bad("vertex is not the pair of boundary fan roots".into());
        }
        match order_with(&sys, first, last) {
            Ok(Order::Finite(o)) if o as usize == m && matches!(o, 3 | 4 | 6) => {}
            other => bad(format!(
                "boundary roots have product order {other:?}, fan size {m}"
            )),
        }
        for (i, r) in e.fan.iter().enumerate() {
            if !r.is_positive() {
                bad(format!("fan root {i} is not positive"));
            }
            match cone_coefficients(r.coords(), first.coords(), last.coords()) {
                Some((a, b)) if a >= 0 && b >= 0 => {}
                _ => bad(format!("fan root {r} is not in the cone of the vertex")),
            }
            for r2 in &e.fan[i + 1..] {
                if r == r2 {
                    bad(format!("fan root {r} repeated"));
                }
                if !matches!(order_with(&sys, r, r2), Ok(Order::Finite(2 | 3 | 4 | 6))) {
                    bad(format!("fan roots {r}, {r2} do not share a vertex"));
                }
            }
        }
        for i in 1..m - 1 {
            match sys.reflect(&e.fan[i], &e.fan[i - 1]) {
                Ok(img) if img.negated() == e.fan[i + 1] => {}
                _ => bad(format!(
                    "fan is not ordered by successive reflection at position {}",
                    i + 1
                )),
            }
        }
        if e.ell <= 1 || e.ell >= m {
            bad(format!("ℓ = {} is not interior to 1..{m}", e.ell));
        } else if e.fan[e.ell - 1] != e.gamma {
            bad(format!("fan position ℓ = {} is not γ", e.ell));
        }
        for (i, r) in e.fan.iter().enumerate() {
            if i + 1 != e.ell && infinite(r) {
                bad(format!(
                    "fan root {r} at position {} has infinite order with s",
                    i + 1
                ));
            }
        }
    }
    for missing in expected.difference(&covered) {
        problems.push(format!("no entry for the root {missing:?}"));
    }
    for extra in covered.difference(&expected) {
        problems.push(format!(
            "entry for {extra:?} beyond the depth bound or not required"
        ));
    }
    VerifyReport {
        accepted: problems.is_empty(),
        entries: cert.entries.len(),
        problems,
    }
}

/// A copy of `cert` with one entry corrupted in a way that must be rejected.
pub fn mutate(cert: &WcCertificate, rng: &mut impl Rng) -> WcCertificate {
    let mut out = cert.clone();
    if out.entries.is_empty() {
        out.depth += 1;
        return out;
    }
    let k = rng.gen_range(0..out.entries.len());
    let other = out.entries
        [(k + 1 + rng.gen_range(0..out.entries.len().max(2) - 1)) % out.entries.len()]
    .clone();
    let e = &mut out.entries[k];
    let m = e.fan.len();
    match rng.gen_range(0..6) {
        0 => e.ell = if rng.gen_bool(0.5) { 1 } else { m },
        1 => e.ell = if e.ell + 1 < m { e.ell + 1 } else { e.ell - 1 },
        2 => {
            let i = rng.gen_range(0..m);
            e.fan.remove(i);
        }
        3 => {
            let i = rng.gen_range(0..m);
            e.fan[i] = e.fan[i].negated();
        }
        4 if other.gamma != e.gamma => e.gamma = other.gamma,
        _ => {
            out.entries.remove(k);
        }
    }
    out
}

/// Every positive root `w α_t` with `ℓ(w) < depth`, from a ball in `W`.
pub fn roots_from_ball(sys: &Arc<CoxeterSystem>, depth: usize) -> BTreeSet<Vec<i64>> {
    let ball = WeylTable::ball(sys.clone(), depth.saturating_sub(1));
    let mut out = BTreeSet::new();
    for w in ball.elements() {
        for t in 0..sys.rank() {
            if let Ok(r) = w.act(&sys.simple_root(t)) {
                if r.is_positive() {
                    out.insert(r.coords().to_vec());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_is_the_simple_roots() {
        let sys = CoxeterSystem::named("~A2").unwrap();
        let r = enumerate_positive_roots(&sys, 1).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|x| x.root.height() == 1));
    }

    #[test]
    fn words_reproduce_the_roots() {
        let sys = CoxeterSystem::named("~G2").unwrap();
        for r in enumerate_positive_roots(&sys, 8).unwrap() {
            let w = sys.from_word(&r.word).unwrap();
            assert_eq!(w.act(&sys.simple_root(r.base)).unwrap(), r.root);
            assert_eq!(w.length() + 1, r.depth);
        }
    }

    #[test]
    fn first_infinite_root_of_a2_sits_in_a_triangle_fan() {
        let sys = CoxeterSystem::named("~A2").unwrap();
        let roots = enumerate_positive_roots(&sys, 6).unwrap();
        let alpha = sys.simple_root(0);
        let g = roots
            .iter()
            .find(|r| order_with(&sys, &r.root, &alpha).unwrap() == Order::Infinite)
            .unwrap();
        let (fan, ell) = build_vertex_fan(&sys, 0, g).unwrap();
        assert_eq!((fan.len(), ell), (3, 2));
        let finite = roots.iter().find(|r| r.root == alpha).unwrap();
        assert!(build_vertex_fan(&sys, 0, finite).is_err());
    }

    #[test]
    fn cone_coefficients_solve_exactly() {
        assert_eq!(
            cone_coefficients(&[1, 2, 1], &[1, 1, 0], &[0, 1, 1]),
            Some((1, 1))
        );
        assert_eq!(cone_coefficients(&[1, 0, 1], &[1, 1, 0], &[0, 1, 1]), None);
    }

    #[test]
    fn spherical_types_are_rejected() {
        assert!(generate_certificate("A2", 0, 5).is_err());
        assert!(generate_certificate("~A2", 3, 5).is_err());
    }
}
