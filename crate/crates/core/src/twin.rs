//! Self-twins of finite spherical buildings: codistance, opposition,
//! coprojections, twin apartments and the opposition graphs `c^{op(k)}`.
//!
//! Both halves carry the chamber set of the underlying building `Δ`. The plus
//! half is `Δ` itself; the minus half is `Δ` with its types relabelled by the
//! diagram automorphism `σ(s) = r_S s r_S`, so `δ₋(x, y) = r_S δ(x, y) r_S`.
//! The codistance is `δ*(x₊, y₋) = δ(x, y) r_S` and `δ*(y₋, x₊) = r_S δ(y, x)`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::building::{AxiomReport, Building, Chamber, CheckMode, Residue};
use crate::coxeter::{ElemId, GenSet};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A chamber of one half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwinChamber {
    pub sign: Sign,
    pub id: Chamber,
}

impl TwinChamber {
    pub fn plus(id: Chamber) -> Self {
        TwinChamber {
            sign: Sign::Plus,
            id,
        }
    }
    pub fn minus(id: Chamber) -> Self {
        TwinChamber {
            sign: Sign::Minus,
            id,
        }
    }
}

impl fmt::Display for TwinChamber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sign, self.id)
    }
}

/// A residue of one half: its sign, its type in that half, and its smallest
/// chamber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwinResidue {
    pub sign: Sign,
    pub j: GenSet,
    pub rep: Chamber,
}

impl TwinResidue {
    pub fn panel_type(&self) -> usize {
        self.j.iter().next().expect("non-empty type")
    }
}

impl fmt::Display for TwinResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}R{}({})", self.sign, self.j, self.rep)
    }
}

/// The self-twin of a thick spherical building.
#[derive(Debug)]
pub struct TwinBuilding {
    b: Arc<Building>,
    w0: ElemId,
    n_long: usize,
    /// `σ(s)` with `r_S s r_S = σ(s)`.
    sigma: Vec<usize>,
    /// `conj[w] = r_S w r_S`.
    conj: Vec<ElemId>,
}

/// Samples of `(ε, x, y, s)` checked when a self-twin is constructed.
pub const CONSTRUCTION_SAMPLES: usize = 2000;

impl TwinBuilding {
    /// Builds the self-twin and checks (Tw1)–(Tw3) on sampled triples.
    pub fn self_twin(b: Arc<Building>) -> Result<Self> {
        let table = b.table().clone();
        let w0 = table
            .longest()
            .ok_or_else(|| domain("self-twins need a spherical building"))?;
        if !b.is_thick() {
            return Err(domain("self-twins need a thick building"));
        }
        let sigma: Vec<usize> = (0..b.rank())
            .map(|s| {
                let c = table.mul(table.mul(w0, table.generator(s)), w0);
                (0..b.rank())
                    .find(|&t| table.generator(t) == c)
                    .expect("r_S normalizes S")
            })
            .collect();
        let conj = (0..table.len() as ElemId)
            .map(|w| table.mul(table.mul(w0, w), w0))
            .collect();
        let t = TwinBuilding {
            n_long: table.length(w0),
            b,
            w0,
            sigma,
            conj,
        };
        let rep = t.check_tw_axioms(CheckMode::Sampled {
            samples: CONSTRUCTION_SAMPLES,
            seed: 0x7717,
        });
        if !rep.passed() {
            return Err(Error::Construction(format!(
                "twin axioms fail for the chosen codistance: {}",
                rep.violations.join("; ")
            )));
        }
        Ok(t)
    }

    pub fn building(&self) -> &Arc<Building> {
        &self.b
    }
    pub fn rank(&self) -> usize {
        self.b.rank()
    }
    pub fn num_chambers(&self) -> usize {
        self.b.num_chambers()
    }
    /// `r_S` as an element id.
    pub fn longest(&self) -> ElemId {
        self.w0
    }
    /// `ℓ(r_S)`.
    pub fn diameter(&self) -> usize {
        self.n_long
    }
    pub fn sigma(&self, s: usize) -> usize {
        self.sigma[s]
    }

    /// The type in the underlying building of a type of the given half.
    pub fn underlying_type(&self, sign: Sign, j: GenSet) -> GenSet {
        match sign {
            Sign::Plus => j,
            Sign::Minus => j.permuted(&self.sigma),
        }
    }

    /// The type in the given half of an underlying type (`σ` is an involution).
    pub fn half_type(&self, sign: Sign, j: GenSet) -> GenSet {
        self.underlying_type(sign, j)
    }

    /// `δ_ε(x, y)` within one half.
    pub fn delta(&self, sign: Sign, x: Chamber, y: Chamber) -> ElemId {
        let d = self.b.delta_id(x, y);
        match sign {
            Sign::Plus => d,
            Sign::Minus => self.conj[d as usize],
        }
    }

    pub fn dist(&self, x: Chamber, y: Chamber) -> usize {
        self.b.dist(x, y)
    }

    /// `δ*(x, y)` for chambers of opposite signs.
    pub fn codistance(&self, x: TwinChamber, y: TwinChamber) -> ElemId {
        assert_ne!(
            x.sign, y.sign,
            "codistance needs chambers of different signs"
        );
        let t = self.b.table();
        match x.sign {
            Sign::Plus => t.mul(self.b.delta_id(x.id, y.id), self.w0),
            Sign::Minus => t.mul(self.w0, self.b.delta_id(x.id, y.id)),
        }
    }

    /// `ℓ*(x, y)`.
    pub fn codist_len(&self, x: TwinChamber, y: TwinChamber) -> usize {
        self.b.table().length(self.codistance(x, y))
    }

    pub fn is_opposite(&self, x: TwinChamber, y: TwinChamber) -> bool {
        x.sign != y.sign && self.b.delta_id(x.id, y.id) == self.w0
    }

    /// `x^op`: the chambers of the other half opposite `x`.
    pub fn opposite(&self, x: TwinChamber) -> Vec<Chamber> {
        let row = self.b.delta_row(x.id);
        self.b
            .chambers()
            .filter(|&y| row[y as usize] == self.w0)
            .collect()
    }

    pub fn residue(&self, sign: Sign, j: GenSet, x: Chamber) -> TwinResidue {
        let r = self.b.residue(self.underlying_type(sign, j), x);
        TwinResidue {
            sign,
            j,
            rep: r.rep,
        }
    }

    pub fn panel(&self, sign: Sign, s: usize, x: Chamber) -> TwinResidue {
        self.residue(sign, GenSet::single(s), x)
    }

    pub fn underlying(&self, r: &TwinResidue) -> Residue {
        Residue {
            j: self.underlying_type(r.sign, r.j),
            rep: r.rep,
        }
    }

    pub fn members(&self, r: &TwinResidue) -> &[Chamber] {
        self.b.members(&self.underlying(r))
    }

    /// Every panel of one half, in underlying panel order.
    pub fn panels(&self, sign: Sign) -> Vec<TwinResidue> {
        self.b
            .all_panels()
            .into_iter()
            .map(|p| TwinResidue {
                sign,
                j: self.half_type(sign, p.j),
                rep: p.rep,
            })
            .collect()
    }

    /// Projection onto a residue of either half: the gate minimizing `ℓ_ε`
    /// within a half, the coprojection maximizing `ℓ*` across halves.
    pub fn proj(&self, x: TwinChamber, r: &TwinResidue) -> Chamber {
        if x.sign == r.sign {
            return self.b.projection(x.id, &self.underlying(r));
        }
        self.coprojection(x, r)
    }

    /// The chamber of `R` (in the other half) maximizing `ℓ*(x, ·)`.
    pub fn coprojection(&self, x: TwinChamber, r: &TwinResidue) -> Chamber {
        assert_ne!(
            x.sign, r.sign,
            "coprojection needs a residue of the other half"
        );
        let mut best = (0usize, Chamber::MAX);
        for &y in self.members(r) {
            let l = self.codist_len(
                x,
                TwinChamber {
                    sign: r.sign,
                    id: y,
                },
            );
            if best.1 == Chamber::MAX || l > best.0 {
                best = (l, y);
            }
        }
        best.1
    }

    /// `proj_R Q` as a sorted chamber set.
    pub fn proj_set(&self, q: &TwinResidue, r: &TwinResidue) -> Vec<Chamber> {
        let mut out: Vec<Chamber> = self
            .members(q)
            .iter()
            .map(|&x| {
                self.proj(
                    TwinChamber {
                        sign: q.sign,
                        id: x,
                    },
                    r,
                )
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether `proj_R Q` is exactly the residue `X`.
    pub fn projects_onto(&self, q: &TwinResidue, r: &TwinResidue, x: &TwinResidue) -> bool {
        self.proj_set(q, r) == self.members(x)
    }

    /// Opposite residues: different signs, equal types, containing opposite chambers.
    pub fn residues_opposite(&self, r: &TwinResidue, q: &TwinResidue) -> bool {
        if r.sign == q.sign || r.j != q.j {
            return false;
        }
        self.members(r).iter().any(|&x| {
            self.members(q).iter().any(|&y| {
                self.is_opposite(
                    TwinChamber {
                        sign: r.sign,
                        id: x,
                    },
                    TwinChamber {
                        sign: q.sign,
                        id: y,
                    },
                )
            })
        })
    }

    /// Mutually inverse projection bijections (either sign combination).
    pub fn are_parallel(&self, r: &TwinResidue, q: &TwinResidue) -> bool {
        let one_way = |a: &TwinResidue, b: &TwinResidue| {
            self.members(a).iter().all(|&x| {
                let y = self.proj(
                    TwinChamber {
                        sign: a.sign,
                        id: x,
                    },
                    b,
                );
                self.proj(
                    TwinChamber {
                        sign: b.sign,
                        id: y,
                    },
                    a,
                ) == x
            })
        };
        one_way(r, q) && one_way(q, r)
    }

    /// Cross-sign parallelism of panels by `|proj_P Q| ≥ 2`. When true the
    /// projections are checked to be mutually inverse bijections.
    pub fn cross_parallel(&self, p: &TwinResidue, q: &TwinResidue) -> Result<bool> {
        if p.sign == q.sign {
            return Err(domain("cross_parallel expects panels of different signs"));
        }
        let par = self.proj_set(q, p).len() >= 2;
        if par && !self.are_parallel(p, q) {
            return Err(Error::Structural(format!(
                "|proj_P Q| ≥ 2 but projections are not inverse bijections for {p}, {q}"
            )));
        }
        Ok(par)
    }

    /// `δ(P, Q)` for parallel panels: `δ_ε` within a half, `δ*` across halves,
    /// evaluated at `(x, proj_Q x)` and required not to depend on `x ∈ P`.
    pub fn panel_delta(&self, p: &TwinResidue, q: &TwinResidue) -> Result<ElemId> {
        let mut w = None;
        for &x in self.members(p) {
            let xc = TwinChamber {
                sign: p.sign,
                id: x,
            };
            let y = self.proj(xc, q);
            let d = if p.sign == q.sign {
                self.delta(p.sign, x, y)
            } else {
                self.codistance(
                    xc,
                    TwinChamber {
                        sign: q.sign,
                        id: y,
                    },
                )
            };
            match w {
                None => w = Some(d),
                Some(prev) if prev != d => {
                    return Err(domain(format!("{p} and {q} are not parallel")))
                }
                Some(_) => {}
            }
        }
        Ok(w.expect("non-empty panel"))
    }

    /// The twin apartment `A(x, y)` of an opposite pair: chambers `z` with
    /// `δ(x, z) = δ(y, z)`, each distance taken within or across halves.
    pub fn twin_apartment(&self, x: TwinChamber, y: TwinChamber) -> Result<Vec<TwinChamber>> {
        if !self.is_opposite(x, y) {
            return Err(domain(format!("{x} and {y} are not opposite")));
        }
        let mut out = Vec::new();
        for sign in Sign::both() {
            for id in self.b.chambers() {
                let z = TwinChamber { sign, id };
                let dist_to = |a: TwinChamber| {
                    if a.sign == sign {
                        self.delta(sign, a.id, id)
                    } else {
                        self.codistance(a, z)
                    }
                };
                if dist_to(x) == dist_to(y) {
                    out.push(z);
                }
            }
        }
        Ok(out)
    }

    /// Checks (Tw1)–(Tw3) and `δ*(x, z) ∈ {w, ws}` for `z` adjacent to `y`.
    pub fn check_tw_axioms(&self, mode: CheckMode) -> AxiomReport {
        let mut rep = AxiomReport::default();
        let n = self.num_chambers() as Chamber;
        match mode {
            CheckMode::Exhaustive => {
                for sign in Sign::both() {
                    for x in 0..n {
                        for y in 0..n {
                            self.check_tw_triple(sign, x, y, None, &mut rep);
                        }
                    }
                }
            }
            CheckMode::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..samples {
                    let sign = if rng.gen_bool(0.5) {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    };
                    let x = rng.gen_range(0..n);
                    let y = rng.gen_range(0..n);
                    let s = rng.gen_range(0..self.rank());
                    self.check_tw_triple(sign, x, y, Some(s), &mut rep);
                }
            }
        }
        rep
    }

    fn check_tw_triple(
        &self,
        sign: Sign,
        x: Chamber,
        y: Chamber,
        only: Option<usize>,
        rep: &mut AxiomReport,
    ) {
        let t = self.b.table();
        let xc = TwinChamber { sign, id: x };
        let yc = TwinChamber {
            sign: sign.flip(),
            id: y,
        };
        let w = self.codistance(xc, yc);
        rep.checked += 1;
        if self.codistance(yc, xc) != t.inverse(w) {
            rep.fail(format!("Tw1: δ*({yc},{xc}) ≠ δ*({xc},{yc})⁻¹"));
        }
        for s in 0..self.rank() {
            if only.is_some_and(|o| o != s) {
                continue;
            }
            let ws = t.right_mul_gen(w, s);
            let shorter = t.length(ws) + 1 == t.length(w);
            let mut tw3 = false;
            for &z in self.members(&self.panel(sign.flip(), s, y)) {
                if z == y {
                    continue;
                }
                if self.delta(sign.flip(), y, z) != t.generator(s) {
                    rep.fail(format!("δ({yc},{z}) ≠ s{} inside a twin s-panel", s + 1));
                }
                let d = self.codistance(
                    xc,
                    TwinChamber {
                        sign: sign.flip(),
                        id: z,
                    },
                );
                if d != w && d != ws {
                    rep.fail(format!("δ*({xc},{z}) ∉ {{w, ws}} (y = {yc}, s{})", s + 1));
                }
                if shorter && d != ws {
                    rep.fail(format!(
                        "Tw2: ℓ(ws) < ℓ(w) but δ*({xc},{z}) ≠ ws (y = {yc}, s{})",
                        s + 1
                    ));
                }
                tw3 |= d == ws;
            }
            if !tw3 {
                rep.fail(format!(
                    "Tw3: no z s{}-adjacent to {yc} with δ*({xc}, z) = ws",
                    s + 1
                ));
            }
        }
    }

    /// The graph on `c^{op(k)} = { d | ℓ*(c, d) ≤ k }` with the adjacency of
    /// the other half.
    pub fn opposition_graph(&self, c: TwinChamber, k: usize) -> Result<OppositionGraph> {
        if k > self.n_long {
            return Err(domain(format!("k = {k} exceeds ℓ(r_S) = {}", self.n_long)));
        }
        let other = c.sign.flip();
        let n = self.num_chambers();
        let inside: Vec<bool> = self
            .b
            .chambers()
            .map(|d| self.codist_len(c, TwinChamber { sign: other, id: d }) <= k)
            .collect();
        let vertices: Vec<Chamber> = self.b.chambers().filter(|&d| inside[d as usize]).collect();
        let mut uf = UnionFind::new(n);
        for &d in &vertices {
            for s in 0..self.rank() {
                for &e in self.b.neighbors(s, d) {
                    if inside[e as usize] {
                        uf.union(d as usize, e as usize);
                    }
                }
            }
        }
        let components = uf.components(vertices.iter().map(|&v| v as usize));
        Ok(OppositionGraph {
            center: c,
            k,
            vertices,
            components: components
                .into_iter()
                .map(|c| c.into_iter().map(|v| v as Chamber).collect())
                .collect(),
        })
    }

    /// The edges of the graph of [`TwinBuilding::opposition_graph`].
    pub fn opposition_edges(&self, g: &OppositionGraph) -> Vec<(Chamber, Chamber, usize)> {
        let inside: HashSet<Chamber> = g.vertices.iter().copied().collect();
        let mut edges = Vec::new();
        for &d in &g.vertices {
            for s in 0..self.rank() {
                for &e in self.b.neighbors(s, d) {
                    if e > d && inside.contains(&e) {
                        let t = self
                            .half_type(g.center.sign.flip(), GenSet::single(s))
                            .iter()
                            .next()
                            .unwrap();
                        edges.push((d, e, t));
                    }
                }
            }
        }
        edges
    }
}

/// Connectivity data of `c^{op(k)}`.
#[derive(Debug, Clone, Serialize)]
pub struct OppositionGraph {
    pub center: TwinChamber,
    pub k: usize,
    pub vertices: Vec<Chamber>,
    /// Components, each sorted, ordered by smallest member.
    pub components: Vec<Vec<Chamber>>,
}

impl OppositionGraph {
    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }
}

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
    /// Groups the given elements by component; components sorted by minimum.
    pub fn components(&mut self, elems: impl Iterator<Item = usize>) -> Vec<Vec<usize>> {
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> =
            std::collections::BTreeMap::new();
        for e in elems {
            let r = self.find(e);
            groups.entry(r).or_default().push(e);
        }
        let mut out: Vec<Vec<usize>> = groups
            .into_values()
            .map(|mut v| {
                v.sort_unstable();
                v
            })
            .collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn twin(name: &str) -> TwinBuilding {
        TwinBuilding::self_twin(Arc::new(zoo::build(name).unwrap().building)).unwrap()
    }

    #[test]
    fn c2q2_tw_axioms_exhaustive() {
        let t = twin("C2q2");
        let rep = t.check_tw_axioms(CheckMode::Exhaustive);
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.checked, 2 * 45 * 45);
    }

    #[test]
    fn untwisted_minus_half_would_fail_tw2() {
        // With δ₋ = δ, δ*(x₊, y₋) = r_S δ(x, y) and δ*(x₋, y₊) = δ(x, y) r_S,
        // (Tw2) fails from the minus side as soon as r_S is not central, as in
        // type A2.
        let t = twin("A2q2");
        let b = t.building();
        let table = b.table();
        let mut violated = false;
        for x in b.chambers() {
            for y in b.chambers() {
                let w = table.mul(b.delta_id(x, y), t.longest());
                for s in 0..2 {
                    let ws = table.right_mul_gen(w, s);
                    if table.length(ws) + 1 != table.length(w) {
                        continue;
                    }
                    for &z in b.neighbors(s, y) {
                        if z != y && table.mul(b.delta_id(x, z), t.longest()) != ws {
                            violated = true;
                        }
                    }
                }
            }
        }
        assert!(violated);
    }

    #[test]
    fn opposite_chamber_counts() {
        for (name, count) in [("A2q2", 8), ("A2q3", 27), ("C2q2", 16), ("A3q2", 64)] {
            let t = twin(name);
            for x in t.building().chambers() {
                assert_eq!(t.opposite(TwinChamber::plus(x)).len(), count, "{name}");
                assert_eq!(t.opposite(TwinChamber::minus(x)).len(), count, "{name}");
            }
        }
    }

    #[test]
    fn opposition_is_symmetric_and_matches_codistance() {
        let t = twin("C2q2");
        for x in t.building().chambers() {
            for y in t.building().chambers() {
                let (xp, ym) = (TwinChamber::plus(x), TwinChamber::minus(y));
                assert_eq!(t.is_opposite(xp, ym), t.is_opposite(ym, xp));
                assert_eq!(t.is_opposite(xp, ym), t.codistance(xp, ym) == 0);
                assert_eq!(
                    t.is_opposite(xp, ym),
                    t.building().delta_id(x, y) == t.longest()
                );
            }
        }
    }

    #[test]
    fn coprojection_gate_property_and_agreement_with_projection() {
        let t = twin("C2q2");
        let table = t.building().table().clone();
        for x in t.building().chambers() {
            for sign in Sign::both() {
                let xc = TwinChamber { sign, id: x };
                for p in t.panels(sign.flip()) {
                    let z = t.coprojection(xc, &p);
                    assert_eq!(z, t.building().projection(x, &t.underlying(&p)));
                    let wz = t.codistance(
                        xc,
                        TwinChamber {
                            sign: sign.flip(),
                            id: z,
                        },
                    );
                    for &y in t.members(&p) {
                        let wy = t.codistance(
                            xc,
                            TwinChamber {
                                sign: sign.flip(),
                                id: y,
                            },
                        );
                        assert_eq!(wy, table.mul(wz, t.delta(sign.flip(), z, y)));
                    }
                }
            }
        }
    }

    #[test]
    fn opposite_residues_and_r_j() {
        // proj_T x = y iff δ*(x, y) = r_J iff proj_R y = x, for opposite J-residues.
        let t = twin("C2q2");
        let table = t.building().table().clone();
        for j in [GenSet::single(0), GenSet::single(1)] {
            let rj = table.generator(j.iter().next().unwrap());
            let plus = t.panels(Sign::Plus);
            let minus = t.panels(Sign::Minus);
            for r in plus.iter().filter(|p| p.j == j) {
                for q in minus.iter().filter(|p| p.j == j) {
                    if !t.residues_opposite(r, q) {
                        continue;
                    }
                    for &x in t.members(r) {
                        for &y in t.members(q) {
                            let (xc, yc) = (TwinChamber::plus(x), TwinChamber::minus(y));
                            let a = t.proj(xc, q) == y;
                            let b = t.codistance(xc, yc) == rj;
                            let c = t.proj(yc, r) == x;
                            assert!(a == b && b == c);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn twin_apartments() {
        let t = twin("C2q2");
        let x = TwinChamber::plus(0);
        for y in t.opposite(x).into_iter().take(4) {
            let y = TwinChamber::minus(y);
            let a = t.twin_apartment(x, y).unwrap();
            assert!(a.contains(&x) && a.contains(&y));
            assert_eq!(a.iter().filter(|z| z.sign == Sign::Plus).count(), 8);
            assert_eq!(a.iter().filter(|z| z.sign == Sign::Minus).count(), 8);
            for sign in Sign::both() {
                for p in t.panels(sign) {
                    let inter: Vec<Chamber> = t
                        .members(&p)
                        .iter()
                        .copied()
                        .filter(|&id| a.contains(&TwinChamber { sign, id }))
                        .collect();
                    if inter.is_empty() {
                        continue;
                    }
                    let px = t.proj(x, &p);
                    let py = t.proj(y, &p);
                    assert_ne!(px, py);
                    let mut expect = vec![px, py];
                    expect.sort_unstable();
                    assert_eq!(inter, expect);
                }
            }
        }
        assert!(t.twin_apartment(x, TwinChamber::minus(0)).is_err());
    }

    #[test]
    fn adjacency_criterion_via_opposites() {
        // δ₋(x, y) ∈ <s> iff every z ∈ x^op has an s-adjacent z' ∈ y^op.
        let t = twin("C2q2");
        let b = t.building();
        for x in b.chambers() {
            let xop = t.opposite(TwinChamber::minus(x));
            for y in b.chambers() {
                let yop: HashSet<Chamber> = t.opposite(TwinChamber::minus(y)).into_iter().collect();
                for s in 0..2 {
                    let d = t.delta(Sign::Minus, x, y);
                    let lhs = d == 0 || d == b.table().generator(s);
                    let rhs = xop.iter().all(|&z| {
                        t.members(&t.panel(Sign::Plus, s, z))
                            .iter()
                            .any(|zz| yop.contains(zz))
                    });
                    assert_eq!(lhs, rhs, "x={x} y={y} s={s}");
                }
            }
        }
    }

    #[test]
    fn opposition_graph_levels_coincide_with_spherical_notion() {
        let t = twin("C2q2");
        let n = t.diameter();
        for k in 0..=n {
            let g = t.opposition_graph(TwinChamber::plus(3), k).unwrap();
            let spherical: Vec<Chamber> = t
                .building()
                .chambers()
                .filter(|&d| t.dist(3, d) + k >= n)
                .collect();
            assert_eq!(g.vertices, spherical);
        }
        assert!(t.opposition_graph(TwinChamber::plus(0), n + 1).is_err());
    }

    #[test]
    fn condition_co_dichotomy() {
        let t = twin("C2q2");
        for x in t.building().chambers() {
            for sign in Sign::both() {
                let c = TwinChamber { sign, id: x };
                assert!(!t.opposition_graph(c, 0).unwrap().is_connected());
                assert!(t.opposition_graph(c, 1).unwrap().is_connected());
            }
        }
        for name in ["A2q2", "A2q3"] {
            let t = twin(name);
            for x in t.building().chambers() {
                assert!(
                    t.opposition_graph(TwinChamber::plus(x), 0)
                        .unwrap()
                        .is_connected(),
                    "{name}"
                );
            }
        }
    }

    #[test]
    fn non_spherical_or_thin_input_is_rejected() {
        let thin = Building::thin(crate::coxeter::CoxeterMatrix::named("A2").unwrap(), 3).unwrap();
        assert!(matches!(
            TwinBuilding::self_twin(Arc::new(thin)),
            Err(Error::Domain(_))
        ));
        let affine =
            Building::thin(crate::coxeter::CoxeterMatrix::named("~A2").unwrap(), 2).unwrap();
        assert!(matches!(
            TwinBuilding::self_twin(Arc::new(affine)),
            Err(Error::Domain(_))
        ));
    }
}
