//! Finite RGD-systems given by root subgroups of matrix groups over `F_q`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::building::Chamber;
use crate::coxeter::{CoxeterSystem, Order, Root, WeylElement};
use crate::error::{domain, structural, Error, Result};
use crate::fq::FqMatrix;
use crate::twin::Sign;
use crate::zoo::{preserves_form, symplectic_gram, FlagBuilding};

pub const FAMILY_NAMES: [&str; 3] = ["SL3F2", "SL3F3", "Sp4F2"];

const SL3F2: &str = include_str!("../fixtures/rgd/sl3f2.txt");
const SL3F3: &str = include_str!("../fixtures/rgd/sl3f3.txt");
const SP4F2: &str = include_str!("../fixtures/rgd/sp4f2.txt");

/// Root subgroups `U_α`, indexed by the roots of a finite Coxeter system.
#[derive(Debug, Clone)]
pub struct RgdFamily {
    pub name: String,
    pub q: u8,
    pub dim: usize,
    pub system: Arc<CoxeterSystem>,
    /// Zoo name of the flag building the group acts on.
    pub building: String,
    pub roots: Vec<Root>,
    pub generators: Vec<Vec<FqMatrix>>,
    /// Gram matrix of the preserved alternating form, if any.
    pub form: Option<FqMatrix>,
    subgroups: Vec<Vec<FqMatrix>>,
}

/// `a⁻¹ b⁻¹ a b`.
pub fn commutator(a: &FqMatrix, b: &FqMatrix) -> FqMatrix {
    let ai = a.inverse().expect("group elements are invertible");
    let bi = b.inverse().expect("group elements are invertible");
    ai.mul(&bi).mul(a).mul(b)
}

/// The subgroup generated by `gens`, sorted.
pub fn closure(gens: &[FqMatrix], dim: usize, q: u8) -> Vec<FqMatrix> {
    let id = FqMatrix::identity(dim, q);
    let mut seen: HashSet<FqMatrix> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    let mut out: Vec<FqMatrix> = seen.into_iter().collect();
    out.sort();
    out
}

impl RgdFamily {
    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name.to_ascii_lowercase().as_str() {
            "sl3f2" => SL3F2,
            "sl3f3" => SL3F3,
            "sp4f2" => SP4F2,
            _ => {
                return Err(domain(format!(
                    "unknown family {name:?}; known: {}",
                    FAMILY_NAMES.join(", ")
                )))
            }
        };
        RgdFamily::parse(text)
    }

    /// Parses a family: header lines `name`, `type`, `field`, `building`,
    /// optional `form symplectic`, then blocks `root c1 … cn` followed by the
    /// rows of one generator matrix. A root may have several blocks.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let (mut name, mut ty, mut q, mut building, mut symplectic) =
            (None, None, None, None, false);
        let mut blocks: Vec<(usize, Root, Vec<&str>)> = Vec::new();
        for &(ln, l) in &lines {
            let mut toks = l.split_whitespace();
            let head = toks.next().unwrap_or("");
            match head {
                "name" => name = toks.next().map(str::to_string),
                "type" => ty = toks.next().map(str::to_string),
                "field" => {
                    q = Some(
                        toks.next()
                            .and_then(|t| t.parse::<u8>().ok())
                            .ok_or_else(|| perr(ln, "bad field".into()))?,
                    )
                }
                "building" => building = toks.next().map(str::to_string),
                "form" => {
                    if toks.next() != Some("symplectic") {
                        return Err(perr(ln, "only `form symplectic` is supported".into()));
                    }
                    symplectic = true;
                }
                "root" => {
                    let coords = toks
                        .map(|t| {
                            t.parse::<i64>()
                                .map_err(|_| perr(ln, format!("bad coordinate {t:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let root = Root::new(coords).map_err(|e| perr(ln, e.to_string()))?;
                    blocks.push((ln, root, Vec::new()));
                }
                _ => match blocks.last_mut() {
                    Some(b) => b.2.push(l),
                    None => return Err(perr(ln, format!("unexpected line {l:?}"))),
                },
            }
        }
        let missing = |what: &str| perr(1, format!("missing `{what}` line"));
        let q = q.ok_or_else(|| missing("field"))?;
        let system = CoxeterSystem::named(&ty.ok_or_else(|| missing("type"))?)?;
        let roots = system.all_roots()?;
        let mut generators: Vec<Vec<FqMatrix>> = vec![Vec::new(); roots.len()];
        let mut dim = None;
        for (ln, root, rows) in blocks {
            let m = FqMatrix::parse(&rows.join("\n"), q).map_err(|e| perr(ln, e.to_string()))?;
            if *dim.get_or_insert(m.dim()) != m.dim() {
                return Err(perr(ln, "generators have different sizes".into()));
            }
            let k = roots
                .iter()
                .position(|r| *r == root)
                .ok_or_else(|| perr(ln, format!("{:?} is not a root", root.coords())))?;
            generators[k].push(m);
        }
        let dim = dim.ok_or_else(|| missing("root"))?;
        let subgroups = generators.iter().map(|g| closure(g, dim, q)).collect();
        Ok(RgdFamily {
            name: name.ok_or_else(|| missing("name"))?,
            q,
            dim,
            system,
            building: building.ok_or_else(|| missing("building"))?,
            roots,
            generators,
            form: symplectic.then(|| symplectic_gram(dim, q)),
            subgroups,
        })
    }

    pub fn root_index(&self, r: &Root) -> Option<usize> {
        self.roots.iter().position(|x| x == r)
    }

    /// The elements of `U_α`, sorted.
    pub fn subgroup(&self, k: usize) -> &[FqMatrix] {
        &self.subgroups[k]
    }

    fn identity(&self) -> FqMatrix {
        FqMatrix::identity(self.dim, self.q)
    }

    fn generated(&self, roots: impl IntoIterator<Item = usize>) -> Vec<FqMatrix> {
        let gens: Vec<FqMatrix> = roots
            .into_iter()
            .flat_map(|k| self.generators[k].iter().cloned())
            .collect();
        closure(&gens, self.dim, self.q)
    }

    fn side_roots(&self, side: Sign) -> Vec<usize> {
        (0..self.roots.len())
            .filter(|&k| self.roots[k].is_positive() == (side == Sign::Plus))
            .collect()
    }

    /// `U_+` or `U_-`.
    pub fn unipotent(&self, side: Sign) -> Vec<FqMatrix> {
        self.generated(self.side_roots(side))
    }

    /// The group generated by all root subgroups.
    pub fn group(&self) -> Vec<FqMatrix> {
        self.generated(0..self.roots.len())
    }

    /// The order of `SL_n(q)` or `Sp_n(q)` from the classical formulas.
    pub fn classical_order(&self) -> u64 {
        let q = u64::from(self.q);
        let n = self.dim as u32;
        match self.form {
            None => q.pow(n * (n - 1) / 2) * (2..=n).map(|i| q.pow(i) - 1).product::<u64>(),
            Some(_) => {
                let m = n / 2;
                q.pow(m * m) * (1..=m).map(|i| q.pow(2 * i) - 1).product::<u64>()
            }
        }
    }

    fn in_classical_group(&self, g: &FqMatrix) -> bool {
        match &self.form {
            None => g.det() == 1,
            Some(gram) => preserves_form(g, gram),
        }
    }

    /// The circle of roots `U_1, …, U_{2n}` of a rank-2 family: the positive
    /// roots in convex order from `α_1` to `α_2`, then their negatives.
    pub fn circle(&self) -> Result<Vec<usize>> {
        if self.system.rank() != 2 {
            return Err(domain("the root circle needs a rank-2 family"));
        }
        let n = self.roots.len() / 2;
        let mut w = self.system.identity();
        let mut pos = Vec::new();
        for j in 0..n {
            let g = j % 2;
            let beta = w.act(&self.system.simple_root(g))?;
            pos.push(
                self.root_index(&beta)
                    .ok_or_else(|| structural("convex order left the root system"))?,
            );
            w = w.times_gen(g);
        }
        let neg: Vec<usize> = pos
            .iter()
            .map(|&k| {
                self.root_index(&self.roots[k].negated())
                    .expect("roots are closed under negation")
            })
            .collect();
        Ok(pos.into_iter().chain(neg).collect())
    }

    /// `{[a_i, a_j]_k}` for `a_i ∈ U_i`, `a_j ∈ U_{i+n−1}` (1-based cyclic
    /// indices), read off the unique factorization of each commutator as
    /// `a_{i+1} ⋯ a_{j−1}`. Must equal `U_k`.
    pub fn commutator_projection(&self, i: usize, k: usize) -> Result<Vec<FqMatrix>> {
        let circle = self.circle()?;
        let two_n = circle.len();
        let n = two_n / 2;
        let at = |idx: usize| circle[(idx - 1) % two_n];
        let j = i + n - 1;
        let k = if k < i { k + two_n } else { k };
        if i == 0 || k < i + 1 || k > i + n - 2 {
            return Err(domain(format!(
                "need i + 1 ≤ k ≤ i + n − 2, got i = {i}, k = {k}, n = {n}"
            )));
        }
        let between: Vec<usize> = (i + 1..j).map(at).collect();
        let mut factorization: HashMap<FqMatrix, Vec<FqMatrix>> = HashMap::new();
        let mut partial: Vec<(FqMatrix, Vec<FqMatrix>)> = vec![(self.identity(), Vec::new())];
        for &r in &between {
            let mut next = Vec::new();
            for (prod, factors) in &partial {
                for u in self.subgroup(r) {
                    let mut f = factors.clone();
                    f.push(u.clone());
                    next.push((prod.mul(u), f));
                }
            }
            partial = next;
        }
        let total = partial.len();
        factorization.extend(partial);
        if factorization.len() != total {
            return Err(structural("the interval product does not factor uniquely"));
        }
        let mut out: HashSet<FqMatrix> = HashSet::new();
        for a in self.subgroup(at(i)) {
            for b in self.subgroup(at(j)) {
                let c = commutator(a, b);
                let factors = factorization.get(&c).ok_or_else(|| {
                    structural(format!(
                        "[a_{i}, a_{j}] is not a product over U_{}..U_{}",
                        i + 1,
                        j - 1
                    ))
                })?;
                out.insert(factors[k - i - 1].clone());
            }
        }
        let mut out: Vec<FqMatrix> = out.into_iter().collect();
        out.sort();
        Ok(out)
    }

    /// Checks (RGD0)–(RGD4) by enumeration.
    pub fn validate(&self) -> Result<RgdReport> {
        let mut checks = Vec::new();
        let id = self.identity();
        let sizes: Vec<usize> = self.subgroups.iter().map(Vec::len).collect();
        let trivial: Vec<usize> = (0..self.roots.len()).filter(|&k| sizes[k] < 2).collect();
        checks.push(AxiomCheck::new(
            "RGD0",
            trivial.is_empty(),
            format!(
                "|U_α| = {sizes:?}; trivial at {:?}",
                trivial
                    .iter()
                    .map(|&k| self.roots[k].coords())
                    .collect::<Vec<_>>()
            ),
        ));

        let mut bad = Vec::new();
        let mut pairs = 0;
        for a in 0..self.roots.len() {
            for b in 0..self.roots.len() {
                if a == b || self.roots[a] == self.roots[b].negated() {
                    continue;
                }
                pairs += 1;
                let interval = self.system.root_interval(&self.roots[a], &self.roots[b])?;
                let inner: Vec<usize> = interval
                    .iter()
                    .filter(|r| **r != self.roots[a] && **r != self.roots[b])
                    .map(|r| self.root_index(r).expect("interval roots are roots"))
                    .collect();
                let target: HashSet<FqMatrix> = self.generated(inner).into_iter().collect();
                for x in self.subgroup(a) {
                    for y in self.subgroup(b) {
                        if !target.contains(&commutator(x, y)) {
                            bad.push(format!(
                                "[U{:?}, U{:?}]",
                                self.roots[a].coords(),
                                self.roots[b].coords()
                            ));
                        }
                    }
                }
            }
        }
        bad.dedup();
        checks.push(AxiomCheck::new(
            "RGD1",
            bad.is_empty(),
            format!("{pairs} ordered pairs; failures {bad:?}"),
        ));

        let mut detail = Vec::new();
        let mut ok = true;
        for s in 0..self.system.rank() {
            let a = self
                .root_index(&self.system.simple_root(s))
                .expect("simple roots are roots");
            let na = self.root_index(&self.roots[a].negated()).expect("negation");
            let gen_s = self.system.generator(s)?;
            for u in self.subgroup(a).iter().filter(|u| **u != id) {
                let witness = self.subgroup(na).iter().find_map(|u1| {
                    self.subgroup(na).iter().find_map(|u2| {
                        let m = u1.mul(u).mul(u2);
                        self.conjugates_roots(&m, &gen_s).then_some(m)
                    })
                });
                match witness {
                    Some(m) => detail.push(format!("s{}: m(u) = {m:?}", s + 1)),
                    None => {
                        ok = false;
                        detail.push(format!("s{}: no m(u) for u = {u:?}", s + 1));
                    }
                }
            }
        }
        checks.push(AxiomCheck::new("RGD2", ok, detail.join("; ")));

        let u_plus: HashSet<FqMatrix> = self.unipotent(Sign::Plus).into_iter().collect();
        let mut ok = true;
        let mut detail = Vec::new();
        for s in 0..self.system.rank() {
            let na = self
                .root_index(&self.system.simple_root(s).negated())
                .expect("negation");
            match self.subgroup(na).iter().find(|x| !u_plus.contains(*x)) {
                Some(x) => detail.push(format!("s{}: {x:?} ∉ U_+", s + 1)),
                None => {
                    ok = false;
                    detail.push(format!("s{}: U_-α ⊆ U_+", s + 1));
                }
            }
        }
        checks.push(AxiomCheck::new(
            "RGD3",
            ok,
            format!("|U_+| = {}; {}", u_plus.len(), detail.join("; ")),
        ));

        let g = self.group();
        let all_classical = g.iter().all(|x| self.in_classical_group(x));
        let torus = g
            .iter()
            .filter(|x| (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || x.get(i, j) == 0)))
            .count();
        let expected = self.classical_order();
        checks.push(AxiomCheck::new(
            "RGD4",
            all_classical && g.len() as u64 == expected,
            format!(
                "|⟨U_α⟩| = {}, |H| = {torus}, classical order {expected}",
                g.len()
            ),
        ));
        Ok(RgdReport {
            family: self.name.clone(),
            checks,
        })
    }

    /// Whether `m U_β m⁻¹ = U_{sβ}` for every root `β`.
    fn conjugates_roots(&self, m: &FqMatrix, s: &WeylElement) -> bool {
        let mi = m.inverse().expect("invertible");
        self.roots.iter().enumerate().all(|(k, beta)| {
            let Ok(sb) = s.act(beta) else { return false };
            let Some(t) = self.root_index(&sb) else {
                return false;
            };
            let mut conj: Vec<FqMatrix> =
                self.subgroup(k).iter().map(|u| m.mul(u).mul(&mi)).collect();
            conj.sort();
            conj == self.subgroup(t)
        })
    }

    /// Compares `U_ε` with the subgroup generated by the `U_β`, `β ∈ Φ_ε`,
    /// with `o(r_β s) < ∞`.
    pub fn check_wc_generation(&self, s: usize, side: Sign) -> Result<WcReport> {
        if s >= self.system.rank() {
            return Err(domain(format!("generator index {s} out of range")));
        }
        let alpha = self.system.simple_root(s);
        let roots = self.side_roots(side);
        let restricted: Vec<usize> = roots
            .iter()
            .copied()
            .filter(|&k| {
                let b = &self.roots[k];
                if *b == alpha || *b == alpha.negated() {
                    return true;
                }
                matches!(
                    self.system.reflection_product_order(b, &alpha),
                    Ok(Order::Finite(_))
                )
            })
            .collect();
        let full = self.generated(roots.clone());
        let sub = self.generated(restricted.clone());
        Ok(WcReport {
            s,
            side,
            full_order: full.len(),
            restricted_order: sub.len(),
            equal: full == sub,
            degenerate: restricted.len() == roots.len(),
        })
    }

    /// Verifies that `U_ε` fixes `c_ε` and acts simply transitively on the
    /// chambers opposite `c_ε`.
    pub fn simply_transitive_check(
        &self,
        fb: &FlagBuilding,
        side: Sign,
    ) -> Result<TransitivityReport> {
        let b = &fb.building;
        let w0 = b
            .table()
            .longest()
            .ok_or_else(|| domain("the building must be spherical"))?;
        let c = match side {
            Sign::Plus => fb.standard_flag(),
            Sign::Minus => fb.opposite_standard_flag(),
        };
        let opposite: Vec<Chamber> = b.chambers().filter(|&d| b.delta_id(c, d) == w0).collect();
        let u = self.unipotent(side);
        let d0 = opposite[0];
        let mut orbit = Vec::new();
        for g in &u {
            let perm = fb.act(g)?;
            if perm[c as usize] != c {
                return Err(structural(format!("{g:?} moves c_{side}")));
            }
            orbit.push(perm[d0 as usize]);
        }
        orbit.sort_unstable();
        let free = orbit.windows(2).all(|w| w[0] != w[1]);
        orbit.dedup();
        Ok(TransitivityReport {
            side,
            group_order: u.len(),
            opposite: opposite.len(),
            free,
            transitive: orbit == opposite,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    pub detail: String,
}

impl AxiomCheck {
    fn new(axiom: &str, passed: bool, detail: String) -> Self {
        AxiomCheck {
            axiom: axiom.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RgdReport {
    pub family: String,
    pub checks: Vec<AxiomCheck>,
}

impl RgdReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WcReport {
    pub s: usize,
    pub side: Sign,
    pub full_order: usize,
    pub restricted_order: usize,
    pub equal: bool,
    /// Every root qualified, as always happens for finite `W`.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitivityReport {
    pub side: Sign,
    pub group_order: usize,
    pub opposite: usize,
    pub free: bool,
    pub transitive: bool,
}

impl TransitivityReport {
    pub fn passed(&self) -> bool {
        self.free && self.transitive && self.group_order == self.opposite
    }
}
