//! W-metric chamber systems: Weyl distance, residues, projections and
//! parallelism.
//!
//! A [`Building`] is stored as its panel partitions, one per generator. The
//! Weyl distance is recovered by breadth-first search (lowest generator first)
//! and memoized row by row, or read off the group law for thin buildings.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coxeter::{
    CoxeterMatrix, CoxeterSystem, ElemId, GenSet, WeylElement, WeylTable, NO_ELEM,
};
use crate::error::{domain, structural, Error, Result};

pub type Chamber = u32;

/// Buildings with at most this many chambers keep a full `δ` table.
pub const FULL_DELTA_LIMIT: usize = 512;
/// Default number of memoized `δ` rows for larger buildings.
pub const DEFAULT_ROW_CACHE: usize = 4096;

/// A residue handle: its type and its smallest chamber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Residue {
    pub j: GenSet,
    pub rep: Chamber,
}

impl Residue {
    /// The generator of a panel.
    pub fn panel_type(&self) -> usize {
        debug_assert_eq!(self.j.len(), 1);
        self.j.iter().next().expect("panel has a type")
    }
}

/// Partition of the chambers into `J`-residues.
#[derive(Debug)]
pub struct Partition {
    pub block_of: Vec<u32>,
    pub blocks: Vec<Vec<Chamber>>,
}

enum DeltaSource {
    /// Thin building: `δ(x, y) = x⁻¹ y`; chamber ids are element ids.
    Group,
    Full(Vec<ElemId>),
    Rows(RowCache),
}

struct RowCache {
    capacity: usize,
    state: RwLock<(HashMap<Chamber, Arc<[ElemId]>>, VecDeque<Chamber>)>,
}

/// Which generator a breadth-first gallery search tries first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GalleryOrder {
    LowestFirst,
    HighestFirst,
}

/// Outcome of an axiom scan.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AxiomReport {
    pub checked: u64,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
    pub(crate) fn fail(&mut self, msg: String) {
        if self.violations.len() < 20 {
            self.violations.push(msg);
        }
    }
}

/// How many triples to check.
#[derive(Debug, Clone, Copy)]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

pub struct Building {
    name: String,
    sys: Arc<CoxeterSystem>,
    table: Arc<WeylTable>,
    n: usize,
    panel_of: Vec<Vec<u32>>,
    panels: Vec<Vec<Vec<Chamber>>>,
    delta: DeltaSource,
    partial: bool,
    partitions: Vec<OnceLock<Partition>>,
    automorphisms: Vec<Vec<Chamber>>,
}

impl std::fmt::Debug for Building {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Building")
            .field("name", &self.name)
            .field("chambers", &self.n)
            .field("rank", &self.rank())
            .finish()
    }
}

impl Building {
    /// Builds a chamber system from its panel assignment: `panel_of[s][x]` is
    /// the index of the `s`-panel containing `x`. `W` must be finite.
    pub fn from_panels(
        name: &str,
        sys: Arc<CoxeterSystem>,
        panel_of: Vec<Vec<u32>>,
    ) -> Result<Self> {
        Self::from_panels_with_cache(name, sys, panel_of, DEFAULT_ROW_CACHE)
    }

    pub fn from_panels_with_cache(
        name: &str,
        sys: Arc<CoxeterSystem>,
        panel_of: Vec<Vec<u32>>,
        cache_rows: usize,
    ) -> Result<Self> {
        let rank = sys.rank();
        if panel_of.len() != rank {
            return Err(structural(format!(
                "expected {rank} panel maps, got {}",
                panel_of.len()
            )));
        }
        let n = panel_of[0].len();
        if n == 0 || panel_of.iter().any(|p| p.len() != n) {
            return Err(structural(
                "panel maps must cover the same non-empty chamber set",
            ));
        }
        let table = Arc::new(WeylTable::full(sys.clone())?);
        let panels = build_panel_lists(&panel_of)?;
        for (s, ps) in panels.iter().enumerate() {
            if let Some(p) = ps.iter().position(|p| p.len() < 2) {
                return Err(structural(format!(
                    "s{}-panel {p} has fewer than two chambers",
                    s + 1
                )));
            }
        }
        let delta = if n <= FULL_DELTA_LIMIT {
            DeltaSource::Full(Vec::new())
        } else {
            DeltaSource::Rows(RowCache {
                capacity: cache_rows.max(1),
                state: RwLock::new((HashMap::new(), VecDeque::new())),
            })
        };
        let mut b = Building {
            name: name.to_string(),
            partitions: (0..1usize << rank).map(|_| OnceLock::new()).collect(),
            sys,
            table,
            n,
            panel_of,
            panels,
            delta,
            partial: false,
            automorphisms: Vec::new(),
        };
        if b.partition(GenSet::full(rank)).blocks.len() != 1 {
            return Err(structural("chamber system is not connected"));
        }
        if let DeltaSource::Full(_) = b.delta {
            let mut full = vec![NO_ELEM; n * n];
            for x in 0..n {
                let row = b.bfs_row(x as Chamber)?;
                full[x * n..(x + 1) * n].copy_from_slice(&row);
            }
            b.delta = DeltaSource::Full(full);
        }
        Ok(b)
    }

    /// The Coxeter complex `Σ(W, S)`: all of it for finite `W`, otherwise the
    /// ball of the given radius around `1_W` (flagged partial).
    pub fn thin(matrix: CoxeterMatrix, radius: usize) -> Result<Self> {
        if radius < 1 {
            return Err(domain("thin building radius must be at least 1"));
        }
        let sys = CoxeterSystem::new(matrix)?;
        let name = format!("thin({})", sys.matrix().name().unwrap_or("W"));
        let (table, n, partial) = match WeylTable::full(sys.clone()) {
            Ok(t) => {
                let n = t.len();
                (t, n, false)
            }
            Err(_) => {
                let t = WeylTable::ball(sys.clone(), 2 * radius);
                let n = (0..t.len())
                    .take_while(|&i| t.length(i as ElemId) <= radius)
                    .count();
                (t, n, true)
            }
        };
        let rank = sys.rank();
        let mut panel_of = vec![vec![0u32; n]; rank];
        for (s, row) in panel_of.iter_mut().enumerate() {
            for x in 0..n {
                let xs = table.right_mul_gen(x as ElemId, s) as usize;
                row[x] = if xs < n { x.min(xs) as u32 } else { x as u32 };
            }
        }
        // Renumber panels densely.
        for row in panel_of.iter_mut() {
            let mut ids: HashMap<u32, u32> = HashMap::new();
            for v in row.iter_mut() {
                let next = ids.len() as u32;
                *v = *ids.entry(*v).or_insert(next);
            }
        }
        let panels = build_panel_lists(&panel_of)?;
        Ok(Building {
            name,
            partitions: (0..1usize << rank).map(|_| OnceLock::new()).collect(),
            sys,
            table: Arc::new(table),
            n,
            panel_of,
            panels,
            delta: DeltaSource::Group,
            partial,
            automorphisms: Vec::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn system(&self) -> &Arc<CoxeterSystem> {
        &self.sys
    }
    pub fn table(&self) -> &Arc<WeylTable> {
        &self.table
    }
    pub fn rank(&self) -> usize {
        self.sys.rank()
    }
    pub fn num_chambers(&self) -> usize {
        self.n
    }
    pub fn chambers(&self) -> impl Iterator<Item = Chamber> {
        0..self.n as Chamber
    }
    pub fn is_partial(&self) -> bool {
        self.partial
    }
    pub fn is_thick(&self) -> bool {
        self.panels.iter().all(|ps| ps.iter().all(|p| p.len() >= 3))
    }
    /// `ℓ(r_S)`, for finite `W`.
    pub fn diameter(&self) -> Option<usize> {
        self.table.longest().map(|w| self.table.length(w))
    }

    fn bfs_row(&self, x: Chamber) -> Result<Vec<ElemId>> {
        let mut row = vec![NO_ELEM; self.n];
        row[x as usize] = self.table.identity();
        let mut queue = VecDeque::from([x]);
        while let Some(y) = queue.pop_front() {
            let w = row[y as usize];
            for s in 0..self.rank() {
                for &z in self.neighbors(s, y) {
                    if row[z as usize] == NO_ELEM {
                        let ws = self.table.right_mul_gen(w, s);
                        if ws == NO_ELEM {
                            return Err(structural("gallery distance exceeds the Coxeter group"));
                        }
                        row[z as usize] = ws;
                        queue.push_back(z);
                    }
                }
            }
        }
        Ok(row)
    }

    /// All Weyl distances `δ(x, ·)` as element ids.
    pub fn delta_row(&self, x: Chamber) -> Arc<[ElemId]> {
        match &self.delta {
            DeltaSource::Group => {
                let xi = self.table.inverse(x);
                (0..self.n as ElemId)
                    .map(|y| self.table.mul(xi, y))
                    .collect()
            }
            DeltaSource::Full(full) => full[x as usize * self.n..(x as usize + 1) * self.n].into(),
            DeltaSource::Rows(cache) => {
                if let Some(row) = cache.state.read().expect("cache lock").0.get(&x) {
                    return row.clone();
                }
                let row: Arc<[ElemId]> = self.bfs_row(x).expect("validated at construction").into();
                let mut guard = cache.state.write().expect("cache lock");
                let (rows, order) = &mut *guard;
                if !rows.contains_key(&x) {
                    if rows.len() >= cache.capacity {
                        if let Some(old) = order.pop_front() {
                            rows.remove(&old);
                        }
                    }
                    rows.insert(x, row.clone());
                    order.push_back(x);
                }
                row
            }
        }
    }

    /// `δ(x, y)` as an id in [`Building::table`].
    pub fn delta_id(&self, x: Chamber, y: Chamber) -> ElemId {
        match &self.delta {
            DeltaSource::Group => self.table.mul(self.table.inverse(x), y),
            DeltaSource::Full(full) => full[x as usize * self.n + y as usize],
            DeltaSource::Rows(_) => self.delta_row(x)[y as usize],
        }
    }

    pub fn weyl_distance(&self, x: Chamber, y: Chamber) -> WeylElement {
        self.table.element(self.delta_id(x, y)).clone()
    }

    /// `ℓ(δ(x, y))`, the gallery distance.
    pub fn dist(&self, x: Chamber, y: Chamber) -> usize {
        self.table.length(self.delta_id(x, y))
    }

    pub fn num_panels(&self, s: usize) -> usize {
        self.panels[s].len()
    }
    pub fn panel_index(&self, s: usize, x: Chamber) -> u32 {
        self.panel_of[s][x as usize]
    }
    pub fn panel_members(&self, s: usize, p: u32) -> &[Chamber] {
        &self.panels[s][p as usize]
    }
    /// Chambers `s`-adjacent to `x`, including `x` itself.
    pub fn neighbors(&self, s: usize, x: Chamber) -> &[Chamber] {
        &self.panels[s][self.panel_of[s][x as usize] as usize]
    }
    /// `P_s(x)`.
    pub fn panel(&self, s: usize, x: Chamber) -> Residue {
        Residue {
            j: GenSet::single(s),
            rep: self.neighbors(s, x)[0],
        }
    }
    /// Every panel, ordered by type then by index.
    pub fn all_panels(&self) -> Vec<Residue> {
        (0..self.rank())
            .flat_map(|s| {
                self.panels[s].iter().map(move |p| Residue {
                    j: GenSet::single(s),
                    rep: p[0],
                })
            })
            .collect()
    }

    /// The partition of the chambers into residues of type `j`.
    pub fn partition(&self, j: GenSet) -> &Partition {
        self.partitions[j.0 as usize].get_or_init(|| {
            let mut block_of = vec![u32::MAX; self.n];
            let mut blocks = Vec::new();
            for start in 0..self.n {
                if block_of[start] != u32::MAX {
                    continue;
                }
                let id = blocks.len() as u32;
                let mut members = vec![start as Chamber];
                block_of[start] = id;
                let mut head = 0;
                while head < members.len() {
                    let y = members[head];
                    head += 1;
                    for s in j.iter() {
                        for &z in self.neighbors(s, y) {
                            if block_of[z as usize] == u32::MAX {
                                block_of[z as usize] = id;
                                members.push(z);
                            }
                        }
                    }
                }
                members.sort_unstable();
                blocks.push(members);
            }
            Partition { block_of, blocks }
        })
    }

    /// `R_J(x)`.
    pub fn residue(&self, j: GenSet, x: Chamber) -> Residue {
        if j.len() == 1 {
            return self.panel(j.iter().next().unwrap(), x);
        }
        let p = self.partition(j);
        Residue {
            j,
            rep: p.blocks[p.block_of[x as usize] as usize][0],
        }
    }

    pub fn members(&self, r: &Residue) -> &[Chamber] {
        if r.j.len() == 1 {
            return self.neighbors(r.panel_type(), r.rep);
        }
        let p = self.partition(r.j);
        &p.blocks[p.block_of[r.rep as usize] as usize]
    }

    /// `y ∈ R` iff `δ(rep, y) ∈ <J>`.
    pub fn contains(&self, r: &Residue, y: Chamber) -> bool {
        self.table.in_parabolic(self.delta_id(r.rep, y), r.j)
    }

    /// `proj_R x`: the chamber of `R` closest to `x`.
    pub fn projection(&self, x: Chamber, r: &Residue) -> Chamber {
        let row = self.delta_row(x);
        let mut best = (usize::MAX, Chamber::MAX);
        for &y in self.members(r) {
            let l = self.table.length(row[y as usize]);
            if l < best.0 {
                best = (l, y);
            }
        }
        best.1
    }

    /// `proj_R Q` as a sorted set of chambers.
    pub fn project_residue(&self, q: &Residue, r: &Residue) -> Vec<Chamber> {
        let mut out: Vec<Chamber> = self
            .members(q)
            .iter()
            .map(|&x| self.projection(x, r))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Parallelism: the two projection maps are mutually inverse bijections.
    pub fn are_parallel(&self, r: &Residue, q: &Residue) -> bool {
        let one_way = |a: &Residue, b: &Residue| {
            self.members(a)
                .iter()
                .all(|&x| self.projection(self.projection(x, b), a) == x)
        };
        one_way(r, q) && one_way(q, r)
    }

    /// `δ(P, Q)` for parallel panels: `δ(x, proj_Q x)`, checked to be the same
    /// for every `x ∈ P` and to conjugate the type of `P` onto the type of `Q`.
    pub fn panel_distance(&self, p: &Residue, q: &Residue) -> Result<ElemId> {
        if p.j.len() != 1 || q.j.len() != 1 {
            return Err(domain("panel_distance expects two panels"));
        }
        if !self.are_parallel(p, q) {
            return Err(domain("panels are not parallel"));
        }
        let mut w = None;
        for &x in self.members(p) {
            let d = self.delta_id(x, self.projection(x, q));
            match w {
                None => w = Some(d),
                Some(prev) if prev != d => {
                    return Err(structural("δ(x, proj_Q x) depends on the chamber x"));
                }
                Some(_) => {}
            }
        }
        let w = w.expect("panels are non-empty");
        let t = &self.table;
        let (s1, s2) = (p.panel_type(), q.panel_type());
        let conj = t.mul(t.mul(t.inverse(w), t.generator(s1)), w);
        if conj != t.generator(s2) {
            return Err(structural("type(Q) is not w⁻¹ type(P) w"));
        }
        Ok(w)
    }

    /// `E_k(x)`: the union of all residues of rank at most `k` through `x`.
    pub fn e_k_neighborhood(&self, x: Chamber, k: usize) -> Result<Vec<Chamber>> {
        if k > self.rank() {
            return Err(domain(format!("k = {k} exceeds the rank")));
        }
        let row = self.delta_row(x);
        Ok(self
            .chambers()
            .filter(|&y| self.table.support(row[y as usize]).len() <= k)
            .collect())
    }

    /// A minimal gallery from `x` to `y` found by breadth-first search.
    pub fn minimal_gallery(&self, x: Chamber, y: Chamber, order: GalleryOrder) -> Vec<Chamber> {
        let mut prev = vec![Chamber::MAX; self.n];
        prev[x as usize] = x;
        let mut queue = VecDeque::from([x]);
        let gens: Vec<usize> = match order {
            GalleryOrder::LowestFirst => (0..self.rank()).collect(),
            GalleryOrder::HighestFirst => (0..self.rank()).rev().collect(),
        };
        while let Some(u) = queue.pop_front() {
            if u == y {
                break;
            }
            for &s in &gens {
                let nb = self.neighbors(s, u);
                let iter: Box<dyn Iterator<Item = &Chamber>> = match order {
                    GalleryOrder::LowestFirst => Box::new(nb.iter()),
                    GalleryOrder::HighestFirst => Box::new(nb.iter().rev()),
                };
                for &z in iter {
                    if prev[z as usize] == Chamber::MAX {
                        prev[z as usize] = u;
                        queue.push_back(z);
                    }
                }
            }
        }
        let mut path = vec![y];
        let mut cur = y;
        while cur != x {
            cur = prev[cur as usize];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// The type of the step between two distinct adjacent chambers.
    pub fn adjacency_type(&self, x: Chamber, y: Chamber) -> Option<usize> {
        (x != y).then(|| {
            (0..self.rank()).find(|&s| self.panel_of[s][x as usize] == self.panel_of[s][y as usize])
        })?
    }

    /// The product of the step types along a gallery.
    pub fn gallery_product(&self, gallery: &[Chamber]) -> Result<WeylElement> {
        let mut w = self.sys.identity();
        for pair in gallery.windows(2) {
            let s = self
                .adjacency_type(pair[0], pair[1])
                .ok_or_else(|| domain("consecutive gallery chambers are not adjacent"))?;
            w = w.times_gen(s);
        }
        Ok(w)
    }

    /// Checks (Bu1)–(Bu3) over all triples or a random sample of them.
    pub fn check_axioms(&self, mode: CheckMode) -> AxiomReport {
        let mut rep = AxiomReport::default();
        match mode {
            CheckMode::Exhaustive => {
                for x in self.chambers() {
                    for y in self.chambers() {
                        self.check_pair(x, y, None, &mut rep);
                    }
                }
            }
            CheckMode::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..samples {
                    let x = rng.gen_range(0..self.n) as Chamber;
                    let y = rng.gen_range(0..self.n) as Chamber;
                    let s = rng.gen_range(0..self.rank());
                    self.check_pair(x, y, Some(s), &mut rep);
                }
            }
        }
        rep
    }

    fn check_pair(&self, x: Chamber, y: Chamber, only: Option<usize>, rep: &mut AxiomReport) {
        let t = &self.table;
        let w = self.delta_id(x, y);
        rep.checked += 1;
        if (w == t.identity()) != (x == y) {
            rep.fail(format!("Bu1: δ({x},{y}) = {}", t.element(w)));
        }
        for s in 0..self.rank() {
            if only.is_some_and(|o| o != s) {
                continue;
            }
            let ws = t.right_mul_gen(w, s);
            let longer = t.length(ws) == t.length(w) + 1;
            let mut bu3 = false;
            for &z in self.neighbors(s, y) {
                if z == y {
                    continue;
                }
                if self.delta_id(y, z) != t.generator(s) {
                    rep.fail(format!(
                        "δ({y},{z}) is not s{} for s{}-adjacent chambers",
                        s + 1,
                        s + 1
                    ));
                }
                let d = self.delta_id(x, z);
                if d != w && d != ws {
                    rep.fail(format!(
                        "Bu2: δ({x},{z}) ∉ {{w, ws}} (x={x}, y={y}, s{})",
                        s + 1
                    ));
                }
                if longer && d != ws {
                    rep.fail(format!(
                        "Bu2: ℓ(ws) = ℓ(w)+1 but δ({x},{z}) ≠ ws (y={y}, s{})",
                        s + 1
                    ));
                }
                bu3 |= d == ws;
            }
            if !bu3 {
                rep.fail(format!(
                    "Bu3: no z with δ({y},z) = s{} and δ({x},z) = ws",
                    s + 1
                ));
            }
        }
    }

    /// Declares type-preserving automorphisms (chamber permutations); each is
    /// verified to map panels onto panels of the same type.
    pub fn set_automorphisms(&mut self, gens: Vec<Vec<Chamber>>) -> Result<()> {
        for (k, g) in gens.iter().enumerate() {
            if g.len() != self.n {
                return Err(structural(format!("automorphism {k} has the wrong size")));
            }
            let mut seen = vec![false; self.n];
            for &y in g {
                if y as usize >= self.n || std::mem::replace(&mut seen[y as usize], true) {
                    return Err(structural(format!("automorphism {k} is not a permutation")));
                }
            }
            for s in 0..self.rank() {
                for p in &self.panels[s] {
                    let img = self.panel_of[s][g[p[0] as usize] as usize];
                    if p.iter()
                        .any(|&x| self.panel_of[s][g[x as usize] as usize] != img)
                    {
                        return Err(structural(format!(
                            "automorphism {k} does not preserve s{}-panels",
                            s + 1
                        )));
                    }
                }
            }
        }
        self.automorphisms = gens;
        Ok(())
    }

    pub fn automorphisms(&self) -> &[Vec<Chamber>] {
        &self.automorphisms
    }

    /// The smallest chamber of each orbit of the declared automorphism group.
    pub fn chamber_orbit_representatives(&self) -> Vec<Chamber> {
        let mut orbit = vec![u32::MAX; self.n];
        let mut reps = Vec::new();
        for start in 0..self.n {
            if orbit[start] != u32::MAX {
                continue;
            }
            orbit[start] = start as u32;
            reps.push(start as Chamber);
            let mut stack = vec![start as Chamber];
            while let Some(x) = stack.pop() {
                for g in &self.automorphisms {
                    let y = g[x as usize];
                    if orbit[y as usize] == u32::MAX {
                        orbit[y as usize] = start as u32;
                        stack.push(y);
                    }
                }
            }
        }
        reps
    }

    /// One line per chamber: the id, then the panel index for each generator.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for x in 0..self.n {
            write!(out, "{x}").unwrap();
            for s in 0..self.rank() {
                write!(out, " {}", self.panel_of[s][x]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// The chamber graph with edges coloured by generator.
    pub fn to_dot(&self) -> String {
        const COLORS: [&str; 4] = ["red", "blue", "darkgreen", "orange"];
        let mut out = format!("graph \"{}\" {{\n", self.name);
        for x in 0..self.n {
            writeln!(out, "  {x};").unwrap();
        }
        for s in 0..self.rank() {
            for p in &self.panels[s] {
                for (i, &a) in p.iter().enumerate() {
                    for &b in &p[i + 1..] {
                        writeln!(
                            out,
                            "  {a} -- {b} [color={}, label=\"s{}\"];",
                            COLORS[s % 4],
                            s + 1
                        )
                        .unwrap();
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn build_panel_lists(panel_of: &[Vec<u32>]) -> Result<Vec<Vec<Vec<Chamber>>>> {
    panel_of
        .iter()
        .map(|row| {
            let count = row.iter().map(|&p| p as usize + 1).max().unwrap_or(0);
            let mut lists = vec![Vec::new(); count];
            for (x, &p) in row.iter().enumerate() {
                lists[p as usize].push(x as Chamber);
            }
            if lists.iter().any(Vec::is_empty) {
                return Err(Error::Structural("panel indices are not dense".into()));
            }
            Ok(lists)
        })
        .collect()
}
