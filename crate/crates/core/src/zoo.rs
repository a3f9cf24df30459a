//! Finite thick buildings: flag complexes of projective and symplectic spaces
//! over small prime fields, and ingestion of rank-2 incidence geometries.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use crate::building::{Building, Chamber};
use crate::coxeter::CoxeterSystem;
use crate::error::{domain, Error, Result};
use crate::fq::{add_mod, decode, encode, mul_mod, FqMatrix};

/// The built-in zoo names.
pub const ZOO_NAMES: &[&str] = &["A2q2", "A2q3", "A3q2", "A3q3", "C2q2", "C2q3", "C3q2"];

/// A subspace, stored as the sorted codes of all its vectors.
pub type Subspace = Vec<u32>;
/// A maximal flag, ordered by dimension.
pub type Flag = Vec<Subspace>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagKind {
    Projective,
    Symplectic,
}

/// A building realized as the maximal (isotropic) flags of a vector space.
#[derive(Debug)]
pub struct FlagBuilding {
    pub building: Building,
    kind: FlagKind,
    dim: usize,
    q: u8,
    flags: Vec<Flag>,
    index: HashMap<Flag, Chamber>,
}

impl FlagBuilding {
    pub fn kind(&self) -> FlagKind {
        self.kind
    }
    /// Dimension of the underlying vector space.
    pub fn vector_dim(&self) -> usize {
        self.dim
    }
    pub fn q(&self) -> u8 {
        self.q
    }
    pub fn flag(&self, x: Chamber) -> &Flag {
        &self.flags[x as usize]
    }
    pub fn chamber_of(&self, flag: &Flag) -> Option<Chamber> {
        self.index.get(flag).copied()
    }

    /// The chamber permutation induced by a matrix; fails if the matrix does
    /// not preserve the set of chambers.
    pub fn act(&self, g: &FqMatrix) -> Result<Vec<Chamber>> {
        act_on_flags(&self.flags, &self.index, self.dim, self.q, g)
    }

    /// The flag spanned by initial segments of the standard basis.
    pub fn standard_flag(&self) -> Chamber {
        let basis: Vec<Vec<u8>> = (0..self.dim).map(|i| unit(self.dim, i)).collect();
        self.span_flag(&basis)
    }

    /// The flag spanned by initial segments of the reversed standard basis.
    pub fn opposite_standard_flag(&self) -> Chamber {
        let basis: Vec<Vec<u8>> = (0..self.dim).rev().map(|i| unit(self.dim, i)).collect();
        self.span_flag(&basis)
    }

    fn span_flag(&self, basis: &[Vec<u8>]) -> Chamber {
        let len = self.flags[0].len();
        let mut flag = Vec::new();
        let mut cur: Subspace = vec![0];
        for v in basis.iter().take(len) {
            cur = extend(&cur, &encode(v, self.q), self.dim, self.q);
            flag.push(cur.clone());
        }
        self.chamber_of(&flag).expect("standard flag is a chamber")
    }

    /// The point/line incidence structure of a rank-2 flag building.
    pub fn incidence(&self) -> Result<IncidenceGeometry> {
        if self.flags[0].len() != 2 {
            return Err(domain("incidence export needs a rank-2 building"));
        }
        let gonality = match self.kind {
            FlagKind::Projective => 3,
            FlagKind::Symplectic => 4,
        };
        let mut pts: HashMap<&Subspace, usize> = HashMap::new();
        let mut lines: HashMap<&Subspace, usize> = HashMap::new();
        let mut flags = Vec::new();
        for f in &self.flags {
            let n = pts.len();
            let p = *pts.entry(&f[0]).or_insert(n);
            let n = lines.len();
            let l = *lines.entry(&f[1]).or_insert(n);
            flags.push((p, l));
        }
        Ok(IncidenceGeometry {
            gonality,
            points: (0..pts.len()).map(|i| format!("P{i}")).collect(),
            lines: (0..lines.len()).map(|i| format!("L{i}")).collect(),
            flags,
        })
    }
}

fn act_on_flags(
    flags: &[Flag],
    index: &HashMap<Flag, Chamber>,
    dim: usize,
    q: u8,
    g: &FqMatrix,
) -> Result<Vec<Chamber>> {
    if g.dim() != dim || g.q() != q {
        return Err(domain("matrix does not act on this space"));
    }
    let images: Vec<u32> = (0..(q as u32).pow(dim as u32))
        .map(|c| encode(&g.apply(&decode(c, dim, q)), q))
        .collect();
    flags
        .iter()
        .map(|f| {
            let img: Flag = f
                .iter()
                .map(|v| {
                    let mut w: Vec<u32> = v.iter().map(|&c| images[c as usize]).collect();
                    w.sort_unstable();
                    w
                })
                .collect();
            index
                .get(&img)
                .copied()
                .ok_or_else(|| domain("matrix does not preserve the flag complex"))
        })
        .collect()
}

fn unit(n: usize, i: usize) -> Vec<u8> {
    let mut v = vec![0u8; n];
    v[i] = 1;
    v
}

/// `span(V ∪ {v})` for a subspace given by all of its vectors.
fn extend(space: &[u32], v: &u32, n: usize, q: u8) -> Subspace {
    let vv = decode(*v, n, q);
    let mut out: Vec<u32> = Vec::with_capacity(space.len() * q as usize);
    for &a in space {
        let av = decode(a, n, q);
        for c in 0..q {
            let w: Vec<u8> = av
                .iter()
                .zip(&vv)
                .map(|(&x, &y)| add_mod(x, mul_mod(c, y, q), q))
                .collect();
            out.push(encode(&w, q));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Gram matrix of the standard alternating form on `F_q^n` with basis
/// `e_1..e_m, f_m..f_1`.
pub fn symplectic_gram(n: usize, q: u8) -> FqMatrix {
    let m = n / 2;
    let mut e = vec![0i64; n * n];
    for i in 0..n {
        e[i * n + (n - 1 - i)] = if i < m { 1 } else { -1 };
    }
    FqMatrix::from_signed(n, q, &e).expect("valid gram matrix")
}

fn form(gram: &FqMatrix, x: &[u8], y: &[u8]) -> u8 {
    let gy = gram.apply(y);
    let q = gram.q();
    x.iter()
        .zip(&gy)
        .fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b, q), q))
}

/// Whether `g` preserves the alternating form given by `gram`.
pub fn preserves_form(g: &FqMatrix, gram: &FqMatrix) -> bool {
    g.transpose().mul(gram).mul(g) == *gram
}

fn enumerate_flags(dim: usize, q: u8, len: usize, gram: Option<&FqMatrix>) -> Vec<Flag> {
    let total = (q as u32).pow(dim as u32);
    let vectors: Vec<Vec<u8>> = (0..total).map(|c| decode(c, dim, q)).collect();
    let mut level: Vec<Flag> = vec![Vec::new()];
    for _ in 0..len {
        let mut next: HashSet<Flag> = HashSet::new();
        for flag in &level {
            let cur: Subspace = flag.last().cloned().unwrap_or_else(|| vec![0]);
            for v in 1..total {
                if cur.binary_search(&v).is_ok() {
                    continue;
                }
                if let Some(g) = gram {
                    if cur
                        .iter()
                        .any(|&u| form(g, &vectors[u as usize], &vectors[v as usize]) != 0)
                    {
                        continue;
                    }
                }
                let mut f = flag.clone();
                f.push(extend(&cur, &v, dim, q));
                next.insert(f);
            }
        }
        level = next.into_iter().collect();
    }
    level.sort();
    level
}

fn flag_building(
    name: &str,
    kind: FlagKind,
    dim: usize,
    q: u8,
    sys_name: &str,
) -> Result<FlagBuilding> {
    let rank = match kind {
        FlagKind::Projective => dim - 1,
        FlagKind::Symplectic => dim / 2,
    };
    let gram = (kind == FlagKind::Symplectic).then(|| symplectic_gram(dim, q));
    let flags = enumerate_flags(dim, q, rank, gram.as_ref());
    let index: HashMap<Flag, Chamber> = flags
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i as Chamber))
        .collect();
    let mut panel_of = vec![vec![0u32; flags.len()]; rank];
    for (s, row) in panel_of.iter_mut().enumerate() {
        let mut ids: HashMap<Vec<&Subspace>, u32> = HashMap::new();
        for (x, f) in flags.iter().enumerate() {
            let key: Vec<&Subspace> = f
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != s)
                .map(|(_, v)| v)
                .collect();
            let next = ids.len() as u32;
            row[x] = *ids.entry(key).or_insert(next);
        }
    }
    let sys = CoxeterSystem::named(sys_name)?;
    let mut building = Building::from_panels(name, sys, panel_of)?;
    let perms = group_generators(kind, dim, q)
        .iter()
        .map(|g| act_on_flags(&flags, &index, dim, q, g))
        .collect::<Result<Vec<_>>>()?;
    building.set_automorphisms(perms)?;
    Ok(FlagBuilding {
        building,
        kind,
        dim,
        q,
        flags,
        index,
    })
}

/// Generators of `SL_n(q)` (elementary transvections) or `Sp_n(q)`
/// (symplectic transvections).
pub fn group_generators(kind: FlagKind, dim: usize, q: u8) -> Vec<FqMatrix> {
    match kind {
        FlagKind::Projective => {
            let mut out = Vec::new();
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        out.push(FqMatrix::elementary(dim, q, i, j, 1));
                    }
                }
            }
            out
        }
        FlagKind::Symplectic => {
            let gram = symplectic_gram(dim, q);
            let mut out: Vec<FqMatrix> = Vec::new();
            for code in 1..(q as u32).pow(dim as u32) {
                let v = decode(code, dim, q);
                // x ↦ x + B(x, v) v
                let mut e = vec![0u8; dim * dim];
                for j in 0..dim {
                    let c = form(&gram, &unit(dim, j), &v);
                    for i in 0..dim {
                        e[i * dim + j] = add_mod(u8::from(i == j), mul_mod(c, v[i], q), q);
                    }
                }
                let t = FqMatrix::new(dim, q, e).expect("square");
                if !out.contains(&t) {
                    out.push(t);
                }
            }
            out
        }
    }
}

/// Maximal flags of `PG(dim, q)`: a building of type `A_dim`.
pub fn build_projective_flag_building(dim: usize, q: u8) -> Result<FlagBuilding> {
    if !matches!(dim, 2 | 3) || !matches!(q, 2 | 3) {
        return Err(domain(format!("PG({dim},{q}) is not supported")));
    }
    flag_building(
        &format!("A{dim}q{q}"),
        FlagKind::Projective,
        dim + 1,
        q,
        &format!("A{dim}"),
    )
}

/// Maximal isotropic flags of a symplectic `F_q^n`: a building of type `C_{n/2}`.
pub fn build_symplectic_building(n: usize, q: u8) -> Result<FlagBuilding> {
    match (n, q) {
        (4, 2 | 3) | (6, 2) => {}
        _ => {
            return Err(domain(format!(
                "symplectic building for n = {n}, q = {q} is not supported"
            )))
        }
    }
    flag_building(
        &format!("C{}q{q}", n / 2),
        FlagKind::Symplectic,
        n,
        q,
        &format!("C{}", n / 2),
    )
}

/// Builds a zoo member by name (see [`ZOO_NAMES`]).
pub fn build(name: &str) -> Result<FlagBuilding> {
    match name {
        "A2q2" => build_projective_flag_building(2, 2),
        "A2q3" => build_projective_flag_building(2, 3),
        "A3q2" => build_projective_flag_building(3, 2),
        "A3q3" => build_projective_flag_building(3, 3),
        "C2q2" | "B2q2" => build_symplectic_building(4, 2),
        "C2q3" | "B2q3" => build_symplectic_building(4, 3),
        "C3q2" | "B3q2" => build_symplectic_building(6, 2),
        _ => Err(domain(format!(
            "unknown zoo instance {name:?}; known: {}",
            ZOO_NAMES.join(", ")
        ))),
    }
}

/// A rank-2 incidence geometry given by its flags.
#[derive(Debug, Clone)]
pub struct IncidenceGeometry {
    pub gonality: usize,
    pub points: Vec<String>,
    pub lines: Vec<String>,
    /// `(point, line)` index pairs in input order.
    pub flags: Vec<(usize, usize)>,
}

impl IncidenceGeometry {
    /// Parses `gonality m` followed by one `P<i> L<j>` flag per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut gonality = None;
        let mut points: Vec<String> = Vec::new();
        let mut lines: Vec<String> = Vec::new();
        let mut pidx: HashMap<String, usize> = HashMap::new();
        let mut lidx: HashMap<String, usize> = HashMap::new();
        let mut flags = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if toks[0] == "gonality" {
                if toks.len() != 2 || gonality.is_some() {
                    return Err(err("expected a single `gonality m` header".into()));
                }
                gonality = Some(
                    toks[1]
                        .parse::<usize>()
                        .map_err(|_| err(format!("bad gonality {:?}", toks[1])))?,
                );
                continue;
            }
            if gonality.is_none() {
                return Err(err("flags before the `gonality` header".into()));
            }
            if toks.len() != 2 || !toks[0].starts_with('P') || !toks[1].starts_with('L') {
                return Err(err(format!("expected `P<i> L<j>`, found {line:?}")));
            }
            let p = *pidx.entry(toks[0].to_string()).or_insert_with(|| {
                points.push(toks[0].to_string());
                points.len() - 1
            });
            let l = *lidx.entry(toks[1].to_string()).or_insert_with(|| {
                lines.push(toks[1].to_string());
                lines.len() - 1
            });
            if !seen.insert((p, l)) {
                return Err(err(format!("duplicate flag {line:?}")));
            }
            flags.push((p, l));
        }
        let gonality = gonality.ok_or(Error::Parse {
            line: 1,
            msg: "missing `gonality` header".into(),
        })?;
        Ok(IncidenceGeometry {
            gonality,
            points,
            lines,
            flags,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("gonality {}\n", self.gonality);
        for &(p, l) in &self.flags {
            writeln!(out, "{} {}", self.points[p], self.lines[l]).unwrap();
        }
        out
    }

    /// Orders `(s, t)`: every line has `s + 1` points, every point is on `t + 1` lines.
    pub fn orders(&self) -> Result<(usize, usize)> {
        let mut on_line = vec![0usize; self.lines.len()];
        let mut through_point = vec![0usize; self.points.len()];
        for &(p, l) in &self.flags {
            on_line[l] += 1;
            through_point[p] += 1;
        }
        let constant = |counts: &[usize], names: &[String], what: &str| -> Result<usize> {
            let first = counts[0];
            if let Some(i) = counts.iter().position(|&c| c != first) {
                return Err(Error::Validation(format!(
                    "non-constant order: {} has {first} {what} but {} has {}",
                    names[0], names[i], counts[i]
                )));
            }
            Ok(first)
        };
        if self.points.is_empty() || self.lines.is_empty() {
            return Err(Error::Validation(
                "geometry has no points or no lines".into(),
            ));
        }
        let s = constant(&on_line, &self.lines, "points")?;
        let t = constant(&through_point, &self.points, "lines")?;
        if s < 2 || t < 2 {
            return Err(Error::Validation(
                "every element needs at least two incident elements".into(),
            ));
        }
        Ok((s - 1, t - 1))
    }

    fn vertex_name(&self, v: usize) -> &str {
        if v < self.points.len() {
            &self.points[v]
        } else {
            &self.lines[v - self.points.len()]
        }
    }

    /// The generalized-polygon test: constant orders, incidence graph of
    /// diameter `m` and girth `2m`. Failures carry a witness.
    pub fn validate(&self) -> Result<()> {
        self.orders()?;
        let m = self.gonality;
        if m < 2 {
            return Err(Error::Validation(format!("gonality {m} is too small")));
        }
        let np = self.points.len();
        let nv = np + self.lines.len();
        let mut adj = vec![Vec::new(); nv];
        for &(p, l) in &self.flags {
            adj[p].push(np + l);
            adj[np + l].push(p);
        }
        for start in 0..nv {
            let mut dist = vec![usize::MAX; nv];
            let mut parent = vec![usize::MAX; nv];
            dist[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    } else if v != parent[u] && dist[v] >= dist[u] && dist[u] + dist[v] + 1 < 2 * m
                    {
                        let path_to = |mut x: usize| {
                            let mut p = vec![x];
                            while x != start {
                                x = parent[x];
                                p.push(x);
                            }
                            p
                        };
                        let mut cycle = path_to(u);
                        cycle.reverse();
                        cycle.extend(path_to(v).into_iter().take(dist[v]));
                        let names: Vec<&str> = cycle.iter().map(|&x| self.vertex_name(x)).collect();
                        return Err(Error::Validation(format!(
                            "girth below {}: cycle {}",
                            2 * m,
                            names.join(" - ")
                        )));
                    }
                }
            }
            if let Some(far) = (0..nv).find(|&v| dist[v] == usize::MAX || dist[v] > m) {
                let d = if dist[far] == usize::MAX {
                    "∞".to_string()
                } else {
                    dist[far].to_string()
                };
                return Err(Error::Validation(format!(
                    "diameter exceeds {m}: distance from {} to {} is {d}",
                    self.vertex_name(start),
                    self.vertex_name(far)
                )));
            }
        }
        Ok(())
    }

    /// The flag chamber system, of type `I_2(m)`. Chambers are the flags in
    /// input order; `s1`-panels share a line, `s2`-panels share a point.
    pub fn to_building(&self, name: &str) -> Result<Building> {
        self.validate()?;
        let sys_name = match self.gonality {
            3 => "A2",
            4 => "C2",
            6 => "G2",
            m => {
                return Err(Error::Unsupported(format!(
                    "generalized {m}-gons are not crystallographic"
                )))
            }
        };
        let panel_of = vec![
            self.flags.iter().map(|&(_, l)| l as u32).collect(),
            self.flags.iter().map(|&(p, _)| p as u32).collect(),
        ];
        Building::from_panels(name, CoxeterSystem::named(sys_name)?, panel_of)
    }
}

/// Reads and validates an incidence file.
pub fn ingest_rank2_geometry(path: &Path) -> Result<Building> {
    let text = std::fs::read_to_string(path)?;
    let geom = IncidenceGeometry::parse(&text)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("ingested");
    geom.to_building(name)
}
