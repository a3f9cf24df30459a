//! The panel graph, compatible and anchored (`P`-compatible) paths,
//! wall-adjacency, the graphs `Γ_s(c)`, and wall-connectedness.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::building::Chamber;
use crate::coxeter::{ElemId, GenSet};
use crate::error::{domain, structural, Result};
use crate::twin::{Sign, TwinBuilding, TwinChamber, TwinResidue, UnionFind};

/// An edge of the panel graph: the neighbour and the rank-2 residue in which
/// the two panels are opposite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PanelEdge {
    pub to: usize,
    pub residue: TwinResidue,
}

/// Panels of one half, joined when they are opposite in a rank-2 residue.
#[derive(Debug)]
pub struct PanelGraph<'a> {
    t: &'a TwinBuilding,
    sign: Sign,
    vertices: Vec<TwinResidue>,
    index: HashMap<TwinResidue, usize>,
    adj: Vec<Vec<PanelEdge>>,
}

impl<'a> PanelGraph<'a> {
    /// Builds the panel graph of one half. Fails if two panels are opposite in
    /// two different rank-2 residues.
    pub fn build(t: &'a TwinBuilding, sign: Sign) -> Result<Self> {
        let vertices = t.panels(sign);
        let index: HashMap<TwinResidue, usize> =
            vertices.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut adj: Vec<Vec<PanelEdge>> = vec![Vec::new(); vertices.len()];
        let table = t.building().table().clone();
        let sys = t.building().system().clone();
        let rank = t.rank();
        for a in 0..rank {
            for b in a + 1..rank {
                let j = GenSet::pair(a, b);
                let rj = table
                    .id_of(&sys.longest_element(j)?)
                    .ok_or_else(|| structural("r_J missing from the group table"))?;
                let part = t.building().partition(t.underlying_type(sign, j));
                for block in &part.blocks {
                    let r = t.residue(sign, j, block[0]);
                    let mut panels: Vec<TwinResidue> = Vec::new();
                    for s in [a, b] {
                        for &x in block {
                            let p = t.panel(sign, s, x);
                            if !panels.contains(&p) {
                                panels.push(p);
                            }
                        }
                    }
                    for x in &panels {
                        for y in &panels {
                            if x == y || !opposite_in_residue(t, x, y, rj) {
                                continue;
                            }
                            let (xi, yi) = (index[x], index[y]);
                            if let Some(e) = adj[xi].iter().find(|e| e.to == yi) {
                                return Err(structural(format!(
                                    "panels {x} and {y} are opposite in two residues {} and {r}",
                                    e.residue
                                )));
                            }
                            adj[xi].push(PanelEdge { to: yi, residue: r });
                        }
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_by_key(|e| e.to);
        }
        Ok(PanelGraph {
            t,
            sign,
            vertices,
            index,
            adj,
        })
    }

    pub fn twin(&self) -> &'a TwinBuilding {
        self.t
    }
    pub fn sign(&self) -> Sign {
        self.sign
    }
    pub fn vertices(&self) -> &[TwinResidue] {
        &self.vertices
    }
    pub fn index_of(&self, p: &TwinResidue) -> Option<usize> {
        self.index.get(p).copied()
    }
    pub fn edges(&self, v: usize) -> &[PanelEdge] {
        &self.adj[v]
    }
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn idx(&self, p: &TwinResidue) -> Result<usize> {
        if p.sign != self.sign || p.j.len() != 1 {
            return Err(domain(format!(
                "{p} is not a panel of the {} half",
                self.sign
            )));
        }
        self.index_of(p)
            .ok_or_else(|| domain(format!("{p} is not a canonical panel handle")))
    }

    /// A shortest compatible path from `p` to `q`, or `None` when the panels
    /// are not parallel. Ties go to the smallest panel index.
    pub fn find_compatible_path(
        &self,
        p: &TwinResidue,
        q: &TwinResidue,
    ) -> Result<Option<CompatiblePath>> {
        let (pi, qi) = (self.idx(p)?, self.idx(q)?);
        let found = self.bfs(pi, qi, |edge, from| {
            self.t.projects_onto(p, &edge.residue, &self.vertices[from])
        });
        Ok(found.map(|steps| self.make_path(pi, &steps, None)))
    }

    /// A shortest `P`-compatible path from `q0` to `q`, where the anchor `p`
    /// lies in the other half and is opposite `q0`.
    pub fn find_anchored_path(
        &self,
        p: &TwinResidue,
        q0: &TwinResidue,
        q: &TwinResidue,
    ) -> Result<Option<CompatiblePath>> {
        let (q0i, qi) = (self.idx(q0)?, self.idx(q)?);
        if p.sign == self.sign || p.j.len() != 1 {
            return Err(domain("the anchor must be a panel of the other half"));
        }
        if !self.t.residues_opposite(p, q0) {
            return Err(domain(format!("{q0} is not opposite the anchor {p}")));
        }
        let found = self.bfs(q0i, qi, |edge, from| {
            self.t
                .projects_onto(q0, &edge.residue, &self.vertices[from])
                && self
                    .t
                    .projects_onto(p, &edge.residue, &self.vertices[edge.to])
        });
        let Some(steps) = found else { return Ok(None) };
        let path = self.make_path(q0i, &steps, Some(*p));
        let violations = check_anchor_codistance(self.t, &path);
        if !violations.is_empty() {
            return Err(structural(format!(
                "anchored path fails the codistance criterion: {violations:?}"
            )));
        }
        Ok(Some(path))
    }

    fn bfs(
        &self,
        start: usize,
        goal: usize,
        admissible: impl Fn(&PanelEdge, usize) -> bool,
    ) -> Option<Vec<PanelEdge>> {
        let mut prev: Vec<Option<(usize, PanelEdge)>> = vec![None; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            if u == goal {
                let mut steps = Vec::new();
                let mut cur = goal;
                while let Some((from, edge)) = prev[cur] {
                    steps.push(edge);
                    cur = from;
                }
                steps.reverse();
                return Some(steps);
            }
            for edge in &self.adj[u] {
                if !seen[edge.to] && admissible(edge, u) {
                    seen[edge.to] = true;
                    prev[edge.to] = Some((u, *edge));
                    queue.push_back(edge.to);
                }
            }
        }
        None
    }

    fn make_path(
        &self,
        start: usize,
        steps: &[PanelEdge],
        anchor: Option<TwinResidue>,
    ) -> CompatiblePath {
        let mut panels = vec![self.vertices[start]];
        panels.extend(steps.iter().map(|e| self.vertices[e.to]));
        CompatiblePath {
            sign: self.sign,
            panels,
            types: steps.iter().map(|e| e.residue.j).collect(),
            residues: steps.iter().map(|e| e.residue).collect(),
            anchor,
        }
    }

    /// Every compatible path from `p` to `q` with at most `max_len` steps.
    pub fn enumerate_compatible_paths(
        &self,
        p: &TwinResidue,
        q: &TwinResidue,
        max_len: usize,
    ) -> Result<Vec<CompatiblePath>> {
        let (pi, qi) = (self.idx(p)?, self.idx(q)?);
        let mut out = Vec::new();
        let mut stack: Vec<PanelEdge> = Vec::new();
        self.dfs_compatible(p, pi, qi, max_len, &mut stack, &mut out);
        Ok(out)
    }

    fn dfs_compatible(
        &self,
        p: &TwinResidue,
        cur: usize,
        goal: usize,
        max_len: usize,
        stack: &mut Vec<PanelEdge>,
        out: &mut Vec<CompatiblePath>,
    ) {
        let start = self.index[p];
        if cur == goal {
            out.push(self.make_path(start, stack, None));
        }
        if stack.len() == max_len {
            return;
        }
        for edge in &self.adj[cur] {
            if self.t.projects_onto(p, &edge.residue, &self.vertices[cur]) {
                stack.push(*edge);
                self.dfs_compatible(p, edge.to, goal, max_len, stack, out);
                stack.pop();
            }
        }
    }

    /// Every `P`-compatible path starting at `q0` with at most `max_len` steps.
    pub fn enumerate_anchored_paths(
        &self,
        p: &TwinResidue,
        q0: &TwinResidue,
        max_len: usize,
    ) -> Result<Vec<CompatiblePath>> {
        let q0i = self.idx(q0)?;
        if !self.t.residues_opposite(p, q0) {
            return Err(domain(format!("{q0} is not opposite the anchor {p}")));
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.dfs_anchored(p, q0, q0i, max_len, &mut stack, &mut out);
        Ok(out)
    }

    fn dfs_anchored(
        &self,
        p: &TwinResidue,
        q0: &TwinResidue,
        cur: usize,
        max_len: usize,
        stack: &mut Vec<PanelEdge>,
        out: &mut Vec<CompatiblePath>,
    ) {
        out.push(self.make_path(self.index[q0], stack, Some(*p)));
        if stack.len() == max_len {
            return;
        }
        for edge in &self.adj[cur] {
            if self.t.projects_onto(q0, &edge.residue, &self.vertices[cur])
                && self
                    .t
                    .projects_onto(p, &edge.residue, &self.vertices[edge.to])
            {
                stack.push(*edge);
                self.dfs_anchored(p, q0, edge.to, max_len, stack, out);
                stack.pop();
            }
        }
    }
}

/// Whether panels `x`, `y` of one half are opposite in their common residue
/// of type `J` with longest element `r_J`.
fn opposite_in_residue(t: &TwinBuilding, x: &TwinResidue, y: &TwinResidue, rj: ElemId) -> bool {
    let table = t.building().table();
    let (s, u) = (x.panel_type(), y.panel_type());
    let conj = table.mul(table.mul(rj, table.generator(s)), rj);
    if conj != table.generator(u) {
        return false;
    }
    t.members(x)
        .iter()
        .any(|&a| t.members(y).iter().any(|&b| t.delta(x.sign, a, b) == rj))
}

/// A compatible path `(P_0, …, P_k)` with the rank-2 residues `R(P_{i−1}, P_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatiblePath {
    pub sign: Sign,
    pub panels: Vec<TwinResidue>,
    pub types: Vec<GenSet>,
    pub residues: Vec<TwinResidue>,
    /// The panel `P` of the other half for `P`-compatible paths.
    pub anchor: Option<TwinResidue>,
}

impl CompatiblePath {
    pub fn len(&self) -> usize {
        self.panels.len() - 1
    }
    pub fn is_empty(&self) -> bool {
        self.panels.len() == 1
    }
    pub fn start(&self) -> &TwinResidue {
        &self.panels[0]
    }
    pub fn end(&self) -> &TwinResidue {
        self.panels.last().expect("non-empty path")
    }
}

/// Rechecks the defining conditions of a (possibly anchored) compatible path
/// from scratch. Returns the violated conditions.
pub fn check_compatible(t: &TwinBuilding, path: &CompatiblePath) -> Vec<String> {
    let mut v = Vec::new();
    let table = t.building().table();
    let sys = t.building().system();
    if path.types.len() != path.len() || path.residues.len() != path.len() {
        v.push("type or residue sequence has the wrong length".to_string());
        return v;
    }
    let p0 = path.panels[0];
    if let Some(anchor) = &path.anchor {
        if !t.residues_opposite(anchor, &p0) {
            v.push(format!("P_0 = {p0} is not opposite the anchor {anchor}"));
        }
    }
    for i in 1..path.panels.len() {
        let (prev, cur, j) = (path.panels[i - 1], path.panels[i], path.types[i - 1]);
        if j.len() != 2 || prev.sign != path.sign || cur.sign != path.sign {
            v.push(format!("step {i}: malformed step"));
            continue;
        }
        let r = t.residue(path.sign, j, prev.rep);
        if r != path.residues[i - 1] {
            v.push(format!("step {i}: stored residue is not R_J(P_{{i-1}})"));
        }
        let members = t.members(&r);
        if !t
            .members(&prev)
            .iter()
            .chain(t.members(&cur))
            .all(|x| members.binary_search(x).is_ok())
        {
            v.push(format!("step {i}: panels not contained in the residue"));
            continue;
        }
        let Ok(rj) = sys
            .longest_element(j)
            .map(|w| table.id_of(&w).expect("finite table"))
        else {
            v.push(format!("step {i}: non-spherical type"));
            continue;
        };
        if !opposite_in_residue(t, &prev, &cur, rj) {
            v.push(format!(
                "step {i}: {prev} and {cur} are not opposite in {r}"
            ));
        }
        if !t.projects_onto(&p0, &r, &prev) {
            v.push(format!("step {i}: proj_R P_0 ≠ P_{{i-1}}"));
        }
        if let Some(anchor) = &path.anchor {
            if !t.projects_onto(anchor, &r, &cur) {
                v.push(format!("step {i}: proj_R P ≠ P_i for the anchor"));
            }
        }
    }
    v
}

/// Checks the codistance identity `ℓ*(x, proj_{P_i} x) = ℓ(δ(P_0, P_i)) + 1`
/// for every `x` in the anchor.
pub fn check_anchor_codistance(t: &TwinBuilding, path: &CompatiblePath) -> Vec<String> {
    let mut v = Vec::new();
    let Some(anchor) = path.anchor else { return v };
    let table = t.building().table();
    for (i, pi) in path.panels.iter().enumerate() {
        let Ok(d) = t.panel_delta(&path.panels[0], pi) else {
            v.push(format!("P_0 and P_{i} are not parallel"));
            continue;
        };
        for &x in t.members(&anchor) {
            let xc = TwinChamber {
                sign: anchor.sign,
                id: x,
            };
            let y = t.proj(xc, pi);
            let l = t.codist_len(
                xc,
                TwinChamber {
                    sign: pi.sign,
                    id: y,
                },
            );
            if l != table.length(d) + 1 {
                v.push(format!(
                    "ℓ*({xc}, proj_P{i} x) = {l} ≠ ℓ(δ(P_0, P_{i})) + 1 = {}",
                    table.length(d) + 1
                ));
            }
        }
    }
    v
}

/// Violations of the factorization, multiplicativity, additivity and
/// reversal properties of a compatible path.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PathReport {
    pub violations: Vec<String>,
}

impl PathReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, for every intermediate panel `P_i`:
/// (a) `proj_{P_k}^{P_0} = proj_{P_k}^{P_i} ∘ proj_{P_i}^{P_0}`,
/// (b) `δ(P_0, P_k) = δ(P_0, P_i) δ(P_i, P_k)`,
/// (c) `ℓ(δ(P_0, P_k)) = ℓ(δ(P_0, P_i)) + ℓ(δ(P_i, P_k))`,
/// (d) the reversed path is compatible.
pub fn verify_path_properties(t: &TwinBuilding, path: &CompatiblePath) -> PathReport {
    let mut rep = PathReport {
        violations: check_compatible(t, path),
    };
    if !rep.violations.is_empty() {
        return rep;
    }
    let table = t.building().table();
    let sign = path.sign;
    let (p0, pk) = (path.panels[0], *path.end());
    let d0k = t.panel_delta(&p0, &pk);
    for (i, pi) in path.panels.iter().enumerate() {
        for &x in t.members(&p0) {
            let direct = t.proj(TwinChamber { sign, id: x }, &pk);
            let via = t.proj(
                TwinChamber {
                    sign,
                    id: t.proj(TwinChamber { sign, id: x }, pi),
                },
                &pk,
            );
            if direct != via {
                rep.violations
                    .push(format!("(a) fails at i = {i}, x = {x}"));
            }
        }
        match (&d0k, t.panel_delta(&p0, pi), t.panel_delta(pi, &pk)) {
            (Ok(a), Ok(b), Ok(c)) => {
                if *a != table.mul(b, c) {
                    rep.violations.push(format!("(b) fails at i = {i}"));
                }
                if table.length(*a) != table.length(b) + table.length(c) {
                    rep.violations.push(format!("(c) fails at i = {i}"));
                }
            }
            _ => rep.violations.push(format!(
                "panels of the path are not pairwise parallel at i = {i}"
            )),
        }
    }
    let reversed = CompatiblePath {
        sign,
        panels: path.panels.iter().rev().copied().collect(),
        types: path.types.iter().rev().copied().collect(),
        residues: path
            .residues
            .iter()
            .rev()
            .zip(path.panels.iter().rev())
            .map(|(r, p)| t.residue(sign, r.j, p.rep))
            .collect(),
        anchor: None,
    };
    for v in check_compatible(t, &reversed) {
        rep.violations.push(format!("(d) {v}"));
    }
    rep
}

/// Checks, for an anchored path with anchor `P` and every `i`:
/// (a) `proj_{P_0}^P = proj_{P_0}^{P_i} ∘ proj_{P_i}^P`,
/// (b) `proj_P^{P_0} = proj_P^{P_i} ∘ proj_{P_i}^{P_0}`,
/// (c) `ℓ*(x, proj_{P_i} x) = ℓ(δ(P_0, P_i)) + 1` for `x ∈ P`.
pub fn verify_anchored_properties(t: &TwinBuilding, path: &CompatiblePath) -> PathReport {
    let mut rep = PathReport {
        violations: check_compatible(t, path),
    };
    let Some(anchor) = path.anchor else {
        rep.violations.push("path has no anchor".into());
        return rep;
    };
    let p0 = path.panels[0];
    for (i, pi) in path.panels.iter().enumerate() {
        for &x in t.members(&anchor) {
            let xc = TwinChamber {
                sign: anchor.sign,
                id: x,
            };
            let direct = t.proj(xc, &p0);
            let via = t.proj(
                TwinChamber {
                    sign: pi.sign,
                    id: t.proj(xc, pi),
                },
                &p0,
            );
            if direct != via {
                rep.violations
                    .push(format!("(a) fails at i = {i}, x = {xc}"));
            }
        }
        for &y in t.members(&p0) {
            let yc = TwinChamber {
                sign: p0.sign,
                id: y,
            };
            let direct = t.proj(yc, &anchor);
            let via = t.proj(
                TwinChamber {
                    sign: pi.sign,
                    id: t.proj(yc, pi),
                },
                &anchor,
            );
            if direct != via {
                rep.violations
                    .push(format!("(b) fails at i = {i}, y = {yc}"));
            }
        }
    }
    for v in check_anchor_codistance(t, path) {
        rep.violations.push(format!("(c) {v}"));
    }
    rep
}

/// Certificate for a set of mutually wall-adjacent vertices: each member has a
/// `P_s(c)`-compatible path to the common target panel with the same type.
#[derive(Debug, Clone, Serialize)]
pub struct WallClass {
    pub target: TwinResidue,
    pub types: Vec<GenSet>,
    /// `(vertex index, path)` pairs.
    pub members: Vec<(usize, CompatiblePath)>,
}

/// The graph `Γ_s(c)` with certificates.
#[derive(Debug, Clone, Serialize)]
pub struct WallGraph {
    pub center: TwinChamber,
    pub s: usize,
    pub anchor: TwinResidue,
    pub bound: usize,
    /// Whether `bound` reaches the longest possible anchored path, so that a
    /// missing edge is a proof of non-adjacency.
    pub exhaustive: bool,
    pub vertices: Vec<TwinResidue>,
    /// `(a, b, class)` with `a < b`.
    pub edges: Vec<(usize, usize, usize)>,
    pub classes: Vec<WallClass>,
    pub components: Vec<Vec<usize>>,
}

impl WallGraph {
    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }

    pub fn to_dot(&self) -> String {
        let mut out = format!("graph \"Gamma_s{}({})\" {{\n", self.s + 1, self.center);
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "  {i} [label=\"{v}\"];").unwrap();
        }
        for (a, b, _) in &self.edges {
            writeln!(out, "  {a} -- {b};").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Default search bound: `ℓ(r_S) · |S|`.
pub fn default_bound(t: &TwinBuilding) -> usize {
    t.diameter() * t.rank()
}

/// Builds `Γ_s(c)`: vertices are the panels opposite `P_s(c)`; two vertices
/// are adjacent when they have `P_s(c)`-compatible paths of equal length and
/// type to a common panel.
pub fn wall_graph(g: &PanelGraph<'_>, c: TwinChamber, s: usize, bound: usize) -> Result<WallGraph> {
    let t = g.twin();
    if g.sign() != c.sign.flip() {
        return Err(domain(
            "the panel graph must belong to the half opposite the center",
        ));
    }
    if s >= t.rank() {
        return Err(domain(format!("generator index {s} out of range")));
    }
    let anchor = t.panel(c.sign, s, c.id);
    let vertices: Vec<TwinResidue> = g
        .vertices()
        .iter()
        .filter(|q| q.j == anchor.j && t.residues_opposite(&anchor, q))
        .copied()
        .collect();
    let mut by_signature: BTreeMap<(TwinResidue, Vec<GenSet>), Vec<(usize, CompatiblePath)>> =
        BTreeMap::new();
    for (vi, q) in vertices.iter().enumerate() {
        for path in g.enumerate_anchored_paths(&anchor, q, bound)? {
            by_signature
                .entry((*path.end(), path.types.clone()))
                .or_default()
                .push((vi, path));
        }
    }
    let mut classes = Vec::new();
    let mut edge_map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for ((target, types), members) in by_signature {
        let mut distinct: Vec<usize> = members.iter().map(|(v, _)| *v).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 2 {
            continue;
        }
        let class = classes.len();
        for (i, &a) in distinct.iter().enumerate() {
            for &b in &distinct[i + 1..] {
                edge_map.entry((a, b)).or_insert(class);
            }
        }
        let mut kept: Vec<(usize, CompatiblePath)> = Vec::new();
        for (v, p) in members {
            if !kept.iter().any(|(k, _)| *k == v) {
                kept.push((v, p));
            }
        }
        classes.push(WallClass {
            target,
            types,
            members: kept,
        });
    }
    let edges: Vec<(usize, usize, usize)> =
        edge_map.into_iter().map(|((a, b), c)| (a, b, c)).collect();
    let mut uf = UnionFind::new(vertices.len());
    for &(a, b, _) in &edges {
        uf.union(a, b);
    }
    let components = uf.components(0..vertices.len());
    Ok(WallGraph {
        center: c,
        s,
        anchor,
        bound,
        exhaustive: bound >= t.diameter(),
        vertices,
        edges,
        classes,
        components,
    })
}

/// Re-verifies a wall graph from its certificates alone.
pub fn verify_wall_graph(t: &TwinBuilding, wg: &WallGraph) -> Vec<String> {
    let mut v = Vec::new();
    let anchor = t.panel(wg.center.sign, wg.s, wg.center.id);
    if anchor != wg.anchor {
        v.push("stored anchor is not P_s(c)".to_string());
    }
    for q in &wg.vertices {
        if !t.residues_opposite(&anchor, q) {
            v.push(format!("vertex {q} is not opposite P_s(c)"));
        }
    }
    for (ci, class) in wg.classes.iter().enumerate() {
        for (vi, path) in &class.members {
            if path.anchor != Some(anchor) || path.start() != &wg.vertices[*vi] {
                v.push(format!(
                    "class {ci}: path does not start at vertex {vi} with anchor P_s(c)"
                ));
            }
            if path.end() != &class.target || path.types != class.types {
                v.push(format!(
                    "class {ci}: path of vertex {vi} has a different target or type"
                ));
            }
            for msg in check_compatible(t, path) {
                v.push(format!("class {ci}, vertex {vi}: {msg}"));
            }
        }
    }
    let mut uf = UnionFind::new(wg.vertices.len());
    for &(a, b, ci) in &wg.edges {
        let Some(class) = wg.classes.get(ci) else {
            v.push(format!("edge ({a}, {b}) refers to a missing class"));
            continue;
        };
        let has = |x: usize| class.members.iter().any(|(m, _)| *m == x);
        if a == b || !has(a) || !has(b) {
            v.push(format!("edge ({a}, {b}) is not certified by class {ci}"));
        }
        uf.union(a, b);
    }
    if uf.components(0..wg.vertices.len()) != wg.components {
        v.push("stored components do not match the certified edges".to_string());
    }
    v
}

/// Result for one pair `(c, s)`.
#[derive(Debug, Clone, Serialize)]
pub struct WallPairResult {
    pub center: TwinChamber,
    pub s: usize,
    pub vertices: usize,
    pub edges: usize,
    pub components: usize,
    pub connected: bool,
    pub exhaustive: bool,
    pub certificate_violations: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// Some graph is disconnected but the search bound is below the longest
    /// possible path, so non-adjacency is not proven.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct WallReport {
    pub bound: usize,
    /// Whether only one chamber per automorphism orbit was examined.
    pub transversal: bool,
    pub pairs: Vec<WallPairResult>,
    pub verdict: Verdict,
}

/// Which pairs `(c, s)` to examine.
#[derive(Debug, Clone, Default)]
pub struct WallOptions {
    pub bound: Option<usize>,
    /// Examine every chamber instead of one per automorphism orbit.
    pub all: bool,
    pub only_chamber: Option<TwinChamber>,
    pub only_gen: Option<usize>,
}

/// Decides wall-connectedness by building and re-verifying `Γ_s(c)` for the
/// selected pairs.
pub fn is_wall_connected(t: &TwinBuilding, opts: &WallOptions) -> Result<WallReport> {
    let bound = opts.bound.unwrap_or_else(|| default_bound(t));
    let graphs = [
        PanelGraph::build(t, Sign::Minus)?,
        PanelGraph::build(t, Sign::Plus)?,
    ];
    let reps: Vec<Chamber> = if opts.all || t.building().automorphisms().is_empty() {
        t.building().chambers().collect()
    } else {
        t.building().chamber_orbit_representatives()
    };
    let mut pairs: Vec<(TwinChamber, usize)> = Vec::new();
    for sign in Sign::both() {
        for &c in &reps {
            for s in 0..t.rank() {
                pairs.push((TwinChamber { sign, id: c }, s));
            }
        }
    }
    if let Some(c) = opts.only_chamber {
        pairs = (0..t.rank()).map(|s| (c, s)).collect();
    }
    if let Some(s) = opts.only_gen {
        if s >= t.rank() {
            return Err(domain(format!("generator index {s} out of range")));
        }
        pairs.retain(|&(_, x)| x == s);
        if pairs.is_empty() {
            pairs = reps.iter().map(|&c| (TwinChamber::plus(c), s)).collect();
        }
    }
    let results: Vec<Result<WallPairResult>> = pairs
        .par_iter()
        .map(|&(c, s)| {
            let g = match c.sign {
                Sign::Plus => &graphs[0],
                Sign::Minus => &graphs[1],
            };
            let wg = wall_graph(g, c, s, bound)?;
            Ok(WallPairResult {
                center: c,
                s,
                vertices: wg.vertices.len(),
                edges: wg.edges.len(),
                components: wg.components.len(),
                connected: wg.is_connected(),
                exhaustive: wg.exhaustive,
                certificate_violations: verify_wall_graph(t, &wg),
            })
        })
        .collect();
    let pairs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let verdict = if pairs.iter().any(|p| !p.certificate_violations.is_empty()) {
        Verdict::Fail
    } else if pairs.iter().all(|p| p.connected) {
        Verdict::Pass
    } else if pairs.iter().any(|p| !p.connected && p.exhaustive) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(WallReport {
        bound,
        transversal: !opts.all,
        pairs,
        verdict,
    })
}
