//! Coxeter systems in the crystallographic reflection representation.
//!
//! Elements of `W` are integer matrices acting on the simple-root basis, so
//! finite and affine types are handled by the same exact arithmetic. Column `j`
//! of an element's matrix is the image of the simple root `α_j`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Error, Result};

/// Order of a product of two reflections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn is_finite(self) -> bool {
        matches!(self, Order::Finite(_))
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(m) => write!(f, "{m}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

/// A set of generators, stored as a bitmask over generator indices.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct GenSet(pub u32);

impl GenSet {
    pub const EMPTY: GenSet = GenSet(0);

    pub fn full(rank: usize) -> Self {
        GenSet(((1u64 << rank) - 1) as u32)
    }
    pub fn single(s: usize) -> Self {
        GenSet(1 << s)
    }
    pub fn pair(s: usize, t: usize) -> Self {
        GenSet((1 << s) | (1 << t))
    }
    pub fn from_gens(gens: impl IntoIterator<Item = usize>) -> Self {
        GenSet(gens.into_iter().fold(0, |acc, s| acc | (1 << s)))
    }
    pub fn contains(self, s: usize) -> bool {
        self.0 & (1 << s) != 0
    }
    pub fn with(self, s: usize) -> Self {
        GenSet(self.0 | (1 << s))
    }
    pub fn union(self, other: GenSet) -> Self {
        GenSet(self.0 | other.0)
    }
    pub fn is_subset(self, other: GenSet) -> bool {
        self.0 & !other.0 == 0
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&s| self.contains(s))
    }
    /// Image under a permutation of generator indices.
    pub fn permuted(self, perm: &[usize]) -> Self {
        GenSet::from_gens(self.iter().map(|s| perm[s]))
    }
}

impl fmt::Display for GenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "s{}", s + 1)?;
        }
        f.write_str("}")
    }
}

/// Symmetric Coxeter matrix with crystallographic off-diagonal labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoxeterMatrix {
    rank: usize,
    entries: Vec<Order>,
    labels: Vec<String>,
    name: Option<String>,
}

impl CoxeterMatrix {
    /// Builds a matrix from a full `rank × rank` table of labels.
    pub fn new(rank: usize, entries: Vec<Order>) -> Result<Self> {
        if rank == 0 || rank > 16 {
            return Err(domain(format!("unsupported rank {rank}")));
        }
        if entries.len() != rank * rank {
            return Err(domain("Coxeter matrix has the wrong number of entries"));
        }
        for i in 0..rank {
            if entries[i * rank + i] != Order::Finite(1) {
                return Err(domain(format!("diagonal entry m_{0}{0} must be 1", i + 1)));
            }
            for j in 0..rank {
                if i == j {
                    continue;
                }
                let e = entries[i * rank + j];
                if e != entries[j * rank + i] {
                    return Err(domain(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                match e {
                    Order::Finite(2 | 3 | 4 | 6) | Order::Infinite => {}
                    Order::Finite(m) => {
                        return Err(domain(format!(
                            "label {m} at ({}, {}) is not crystallographic",
                            i + 1,
                            j + 1
                        )))
                    }
                }
            }
        }
        Ok(CoxeterMatrix {
            rank,
            entries,
            labels: (1..=rank).map(|i| format!("s{i}")).collect(),
            name: None,
        })
    }

    fn from_edges(name: &str, rank: usize, edges: &[(usize, usize, Order)]) -> Self {
        let mut entries = vec![Order::Finite(2); rank * rank];
        for i in 0..rank {
            entries[i * rank + i] = Order::Finite(1);
        }
        for &(i, j, m) in edges {
            entries[i * rank + j] = m;
            entries[j * rank + i] = m;
        }
        let mut cm = CoxeterMatrix::new(rank, entries).expect("built-in type is valid");
        cm.name = Some(name.to_string());
        cm
    }

    /// One of the named types `A1 A2 A3 C2 C3 G2 ~A2 ~C2 ~G2`.
    ///
    /// `C_n` has its 4-bond between the last two generators; `~C2` is labelled
    /// linearly `4, 4`, and `~G2` has `o(s1 s2) = 3`, `o(s2 s3) = 6`.
    pub fn named(name: &str) -> Result<Self> {
        use Order::Finite as F;
        let cm = match name {
            "A1" => Self::from_edges(name, 1, &[]),
            "A1xA1" => Self::from_edges(name, 2, &[]),
            "A2" => Self::from_edges(name, 2, &[(0, 1, F(3))]),
            "A3" => Self::from_edges(name, 3, &[(0, 1, F(3)), (1, 2, F(3))]),
            "B2" | "C2" => Self::from_edges("C2", 2, &[(0, 1, F(4))]),
            "B3" | "C3" => Self::from_edges("C3", 3, &[(0, 1, F(3)), (1, 2, F(4))]),
            "G2" => Self::from_edges(name, 2, &[(0, 1, F(6))]),
            "~A1" => Self::from_edges(name, 2, &[(0, 1, Order::Infinite)]),
            "~A2" => Self::from_edges(name, 3, &[(0, 1, F(3)), (1, 2, F(3)), (0, 2, F(3))]),
            "~C2" => Self::from_edges(name, 3, &[(0, 1, F(4)), (1, 2, F(4))]),
            "~G2" => Self::from_edges(name, 3, &[(0, 1, F(3)), (1, 2, F(6))]),
            _ => return Err(domain(format!("unknown Coxeter type {name:?}"))),
        };
        Ok(cm)
    }

    /// Parses the text format: the rank on the first line, then the strict upper
    /// triangle of `m_st` in row-major order (`inf` for ∞). Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                tokens.push((lineno + 1, tok.to_string()));
            }
        }
        let Some((line, first)) = tokens.first().cloned() else {
            return Err(Error::Parse {
                line: 1,
                msg: "empty Coxeter matrix".into(),
            });
        };
        let rank: usize = first.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad rank {first:?}"),
        })?;
        let want = rank * rank.saturating_sub(1) / 2;
        if tokens.len() - 1 != want {
            return Err(Error::Parse {
                line,
                msg: format!(
                    "expected {want} upper-triangle entries, found {}",
                    tokens.len() - 1
                ),
            });
        }
        let mut entries = vec![Order::Finite(1); rank * rank];
        let mut it = tokens[1..].iter();
        for i in 0..rank {
            for j in i + 1..rank {
                let (line, tok) = it.next().expect("counted above");
                let m = if tok == "inf" || tok == "∞" {
                    Order::Infinite
                } else {
                    Order::Finite(tok.parse().map_err(|_| Error::Parse {
                        line: *line,
                        msg: format!("bad label {tok:?}"),
                    })?)
                };
                entries[i * rank + j] = m;
                entries[j * rank + i] = m;
            }
        }
        CoxeterMatrix::new(rank, entries)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn m(&self, s: usize, t: usize) -> Order {
        self.entries[s * self.rank + t]
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
}

/// Cartan pairings for one bond label: `(a_ij, a_ji)` for `i < j`.
fn bond_pairing(m: Order) -> (i64, i64) {
    match m {
        Order::Finite(2) => (0, 0),
        Order::Finite(3) => (-1, -1),
        Order::Finite(4) => (-1, -2),
        Order::Finite(6) => (-1, -3),
        Order::Infinite => (-2, -2),
        Order::Finite(m) => unreachable!("label {m} rejected at construction"),
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn ck_mul(a: i64, b: i64) -> i64 {
    a.checked_mul(b)
        .unwrap_or_else(|| panic!("integer overflow in root coordinates ({a} * {b})"))
}

fn ck_add(a: i64, b: i64) -> i64 {
    a.checked_add(b)
        .unwrap_or_else(|| panic!("integer overflow in root coordinates ({a} + {b})"))
}

/// A Coxeter matrix together with its Cartan data and simple reflections.
#[derive(Debug)]
pub struct CoxeterSystem {
    matrix: CoxeterMatrix,
    /// `cartan[i*n + j] = <α_j, α_i^∨>`.
    cartan: Vec<i64>,
    /// Symmetric form `(α_i, α_j)`.
    form: Vec<i64>,
    simple: Vec<Vec<i64>>,
}

impl CoxeterSystem {
    pub fn new(matrix: CoxeterMatrix) -> Result<Arc<Self>> {
        let n = matrix.rank();
        let mut cartan = vec![0i64; n * n];
        for i in 0..n {
            cartan[i * n + i] = 2;
            for j in i + 1..n {
                let (a, b) = bond_pairing(matrix.m(i, j));
                cartan[i * n + j] = a;
                cartan[j * n + i] = b;
            }
        }
        // Symmetrizer d with d_i a_ij = d_j a_ji, propagated along bonds as fractions.
        let mut d: Vec<Option<(i64, i64)>> = vec![None; n];
        for root in 0..n {
            if d[root].is_some() {
                continue;
            }
            d[root] = Some((1, 1));
            let mut queue = VecDeque::from([root]);
            while let Some(i) = queue.pop_front() {
                let (num, den) = d[i].unwrap();
                for j in 0..n {
                    let (aij, aji) = (cartan[i * n + j], cartan[j * n + i]);
                    if i == j || aij == 0 {
                        continue;
                    }
                    // d_j = d_i * a_ij / a_ji
                    let (mut nn, mut dd) = (num * aij, den * aji);
                    if dd < 0 {
                        nn = -nn;
                        dd = -dd;
                    }
                    let g = gcd(nn, dd);
                    let cand = (nn / g, dd / g);
                    match d[j] {
                        None => {
                            d[j] = Some(cand);
                            queue.push_back(j);
                        }
                        Some(existing) if existing != cand => {
                            return Err(structural("Cartan matrix is not symmetrizable"));
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        let lcm_den = d
            .iter()
            .map(|x| x.unwrap().1)
            .fold(1, |acc, den| acc / gcd(acc, den) * den);
        let dint: Vec<i64> = d
            .iter()
            .map(|x| x.unwrap().0 * (lcm_den / x.unwrap().1))
            .collect();
        let form: Vec<i64> = (0..n * n).map(|k| dint[k / n] * cartan[k]).collect();
        let simple = (0..n)
            .map(|s| {
                let mut m = identity_matrix(n);
                for j in 0..n {
                    m[s * n + j] -= cartan[s * n + j];
                }
                m
            })
            .collect();
        Ok(Arc::new(CoxeterSystem {
            matrix,
            cartan,
            form,
            simple,
        }))
    }

    pub fn named(name: &str) -> Result<Arc<Self>> {
        CoxeterSystem::new(CoxeterMatrix::named(name)?)
    }

    pub fn matrix(&self) -> &CoxeterMatrix {
        &self.matrix
    }
    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
    pub fn cartan(&self, i: usize, j: usize) -> i64 {
        self.cartan[i * self.rank() + j]
    }

    fn check_gen(&self, s: usize) -> Result<()> {
        if s >= self.rank() {
            return Err(domain(format!(
                "generator index {s} out of range for rank {}",
                self.rank()
            )));
        }
        Ok(())
    }

    pub fn identity(self: &Arc<Self>) -> WeylElement {
        let n = self.rank();
        WeylElement::from_parts(self.clone(), identity_matrix(n), identity_matrix(n))
    }

    pub fn generator(self: &Arc<Self>, s: usize) -> Result<WeylElement> {
        self.check_gen(s)?;
        let m = self.simple[s].clone();
        Ok(WeylElement::from_parts(self.clone(), m.clone(), m))
    }

    pub fn from_word(self: &Arc<Self>, word: &[usize]) -> Result<WeylElement> {
        let mut w = self.identity();
        for &s in word {
            self.check_gen(s)?;
            w = w.times_gen(s);
        }
        Ok(w)
    }

    /// Symmetric bilinear form on root coordinates.
    pub fn form(&self, a: &[i64], b: &[i64]) -> i64 {
        let n = self.rank();
        let mut acc = 0i64;
        for i in 0..n {
            if a[i] == 0 {
                continue;
            }
            for j in 0..n {
                if b[j] != 0 {
                    acc = ck_add(acc, ck_mul(ck_mul(a[i], self.form[i * n + j]), b[j]));
                }
            }
        }
        acc
    }

    /// `<x, r^∨> = 2 (x, r) / (r, r)`.
    pub fn pairing(&self, x: &[i64], r: &Root) -> Result<i64> {
        let rr = self.form(&r.coords, &r.coords);
        if rr <= 0 {
            return Err(structural(format!("root {r} has non-positive norm")));
        }
        let num = 2 * self.form(x, &r.coords);
        if num % rr != 0 {
            return Err(structural(format!("non-integral pairing against {r}")));
        }
        Ok(num / rr)
    }

    pub fn simple_root(&self, s: usize) -> Root {
        let mut c = vec![0; self.rank()];
        c[s] = 1;
        Root { coords: c }
    }

    /// `r_r(x) = x - <x, r^∨> r`.
    pub fn reflect(&self, r: &Root, x: &Root) -> Result<Root> {
        let k = self.pairing(&x.coords, r)?;
        let coords: Vec<i64> = x
            .coords
            .iter()
            .zip(&r.coords)
            .map(|(&a, &b)| ck_add(a, -ck_mul(k, b)))
            .collect();
        Root::new(coords)
    }

    /// The reflection `r_β` as a group element.
    pub fn reflection(self: &Arc<Self>, r: &Root) -> Result<WeylElement> {
        let n = self.rank();
        let mut m = vec![0i64; n * n];
        for j in 0..n {
            let k = self.pairing(&self.simple_root(j).coords, r)?;
            for i in 0..n {
                m[i * n + j] = i64::from(i == j) - ck_mul(k, r.coords[i]);
            }
        }
        Ok(WeylElement::from_parts(self.clone(), m.clone(), m))
    }

    /// Order of `r_a r_b` from the crystallographic pairing product
    /// `c = <a,b^∨><b,a^∨>`: `0→2, 1→3, 2→4, 3→6, ≥4→∞`.
    pub fn reflection_product_order(&self, a: &Root, b: &Root) -> Result<Order> {
        if a == b || a.coords.iter().zip(&b.coords).all(|(x, y)| *x == -*y) {
            return Err(domain("reflection_product_order needs a ≠ ±b"));
        }
        let c = self.pairing(&a.coords, b)? * self.pairing(&b.coords, a)?;
        Ok(match c {
            0 => Order::Finite(2),
            1 => Order::Finite(3),
            2 => Order::Finite(4),
            3 => Order::Finite(6),
            c if c >= 4 => Order::Infinite,
            c => return Err(structural(format!("negative pairing product {c}"))),
        })
    }

    /// Whether `<J>` is finite: bounded enumeration for `|J| ≤ 4`, positive
    /// definiteness of the restricted form otherwise; the two are cross-checked
    /// whenever both run.
    pub fn is_spherical(self: &Arc<Self>, j: GenSet) -> bool {
        let pd = self.form_positive_definite(j);
        if j.len() <= 4 {
            let finite = self.enumerate_parabolic(j, 20_000).is_some();
            assert_eq!(
                finite, pd,
                "enumeration and positive-definiteness disagree on sphericity of {j}"
            );
            finite
        } else {
            pd
        }
    }

    fn form_positive_definite(&self, j: GenSet) -> bool {
        let idx: Vec<usize> = j.iter().collect();
        let n = self.rank();
        // Leading principal minors via fraction-free elimination (Bareiss).
        let k = idx.len();
        let mut m: Vec<i128> = Vec::with_capacity(k * k);
        for &a in &idx {
            for &b in &idx {
                m.push(i128::from(self.form[a * n + b]));
            }
        }
        let mut prev = 1i128;
        for p in 0..k {
            let pivot = m[p * k + p];
            if pivot <= 0 {
                return false;
            }
            for r in p + 1..k {
                for c in p + 1..k {
                    m[r * k + c] = (m[r * k + c] * pivot - m[r * k + p] * m[p * k + c]) / prev;
                }
            }
            prev = pivot;
        }
        true
    }

    /// All elements of `<J>` if there are at most `bound` of them.
    pub fn enumerate_parabolic(
        self: &Arc<Self>,
        j: GenSet,
        bound: usize,
    ) -> Option<Vec<WeylElement>> {
        let id = self.identity();
        let mut seen: HashMap<Vec<i64>, ()> = HashMap::from([(id.mat.clone(), ())]);
        let mut out = vec![id];
        let mut head = 0;
        while head < out.len() {
            let w = out[head].clone();
            head += 1;
            for s in j.iter() {
                let ws = w.times_gen(s);
                if !seen.contains_key(&ws.mat) {
                    seen.insert(ws.mat.clone(), ());
                    out.push(ws);
                    if out.len() > bound {
                        return None;
                    }
                }
            }
        }
        Some(out)
    }

    /// The longest element `r_J` of a spherical parabolic subgroup.
    pub fn longest_element(self: &Arc<Self>, j: GenSet) -> Result<WeylElement> {
        if j.iter().any(|s| s >= self.rank()) {
            return Err(domain(format!("{j} is not a subset of S")));
        }
        if !self.is_spherical(j) {
            return Err(domain(format!("{j} is not spherical")));
        }
        let mut w = self.identity();
        'grow: loop {
            for s in j.iter() {
                if !w.has_right_descent(s) {
                    w = w.times_gen(s);
                    continue 'grow;
                }
            }
            return Ok(w);
        }
    }

    /// Decides which alternative of `ℓ(swt) = ℓ(w) − 2` or `swt = w` holds
    /// when `ℓ(sw) = ℓ(w) − 1 = ℓ(wt)`.
    pub fn check_exchange_variant(
        self: &Arc<Self>,
        w: &WeylElement,
        s: usize,
        t: usize,
    ) -> Result<ExchangeOutcome> {
        self.check_gen(s)?;
        self.check_gen(t)?;
        if !w.has_left_descent(s) || !w.has_right_descent(t) {
            return Err(domain("precondition ℓ(sw) = ℓ(w) - 1 = ℓ(wt) violated"));
        }
        let swt = w.gen_times(s).times_gen(t);
        let (lw, lswt) = (w.length(), swt.length());
        if lswt + 2 == lw {
            Ok(ExchangeOutcome::LengthDrop2)
        } else if swt == *w {
            Ok(ExchangeOutcome::Equal)
        } else {
            Err(structural(format!(
                "exchange dichotomy violated: ℓ(w) = {lw}, ℓ(swt) = {lswt}, swt ≠ w"
            )))
        }
    }

    /// All roots of a finite `W` (positive first, in discovery order).
    pub fn all_roots(self: &Arc<Self>) -> Result<Vec<Root>> {
        let table = WeylTable::full(self.clone())?;
        let mut pos: Vec<Root> = Vec::new();
        for w in table.elements() {
            for s in 0..self.rank() {
                let r = w.act(&self.simple_root(s))?;
                if r.is_positive() && !pos.contains(&r) {
                    pos.push(r);
                }
            }
        }
        let neg: Vec<Root> = pos.iter().map(Root::negated).collect();
        pos.extend(neg);
        Ok(pos)
    }

    /// The root interval `[a, b]` of a prenilpotent pair, computed from the
    /// roots as half-sets of chambers of the thin building.
    pub fn root_interval(self: &Arc<Self>, a: &Root, b: &Root) -> Result<Vec<Root>> {
        if a == b {
            return Err(domain("root_interval needs two distinct roots"));
        }
        let table = match WeylTable::full(self.clone()) {
            Ok(t) => t,
            Err(_) => return Err(Error::Unsupported("root intervals need a finite W".into())),
        };
        let roots = self.all_roots()?;
        let half = |r: &Root| -> Result<Vec<bool>> {
            table
                .elements()
                .iter()
                .map(|w| w.root_contains(r))
                .collect()
        };
        let ha = half(a)?;
        let hb = half(b)?;
        let na: Vec<bool> = ha.iter().map(|x| !x).collect();
        let nb: Vec<bool> = hb.iter().map(|x| !x).collect();
        let meet = |x: &[bool], y: &[bool]| -> Vec<bool> {
            x.iter().zip(y).map(|(p, q)| *p && *q).collect()
        };
        let ab = meet(&ha, &hb);
        let nab = meet(&na, &nb);
        if !ab.iter().any(|x| *x) || !nab.iter().any(|x| *x) {
            return Err(domain(format!("{{{a}, {b}}} is not prenilpotent")));
        }
        let mut out = Vec::new();
        for g in &roots {
            let hg = half(g)?;
            let inside = ab.iter().zip(&hg).all(|(p, q)| !*p || *q);
            let outside = nab.iter().zip(&hg).all(|(p, q)| !*p || !*q);
            if inside && outside {
                out.push(g.clone());
            }
        }
        Ok(out)
    }
}

/// Outcome of [`CoxeterSystem::check_exchange_variant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExchangeOutcome {
    LengthDrop2,
    Equal,
}

fn identity_matrix(n: usize) -> Vec<i64> {
    let mut m = vec![0i64; n * n];
    for i in 0..n {
        m[i * n + i] = 1;
    }
    m
}

fn mat_mul(n: usize, a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x == 0 {
                continue;
            }
            for j in 0..n {
                let y = b[k * n + j];
                if y != 0 {
                    out[i * n + j] = ck_add(out[i * n + j], ck_mul(x, y));
                }
            }
        }
    }
    out
}

/// An element of `W` as an integer matrix in the simple-root basis.
///
/// The inverse matrix is carried along so that left descents are as cheap as
/// right descents. The reduced word is filled lazily.
#[derive(Clone)]
pub struct WeylElement {
    sys: Arc<CoxeterSystem>,
    mat: Vec<i64>,
    inv: Vec<i64>,
    word: OnceLock<Vec<u8>>,
}

impl WeylElement {
    fn from_parts(sys: Arc<CoxeterSystem>, mat: Vec<i64>, inv: Vec<i64>) -> Self {
        WeylElement {
            sys,
            mat,
            inv,
            word: OnceLock::new(),
        }
    }

    pub fn system(&self) -> &Arc<CoxeterSystem> {
        &self.sys
    }
    pub fn rank(&self) -> usize {
        self.sys.rank()
    }
    /// Row-major matrix; column `j` is `w(α_j)`.
    pub fn matrix(&self) -> &[i64] {
        &self.mat
    }

    fn same_system(&self, other: &WeylElement) -> bool {
        Arc::ptr_eq(&self.sys, &other.sys) || self.sys.matrix() == other.sys.matrix()
    }

    /// `self · other`.
    pub fn multiply(&self, other: &WeylElement) -> Result<WeylElement> {
        if !self.same_system(other) {
            return Err(structural(
                "multiplying elements of different Coxeter systems",
            ));
        }
        Ok(self.compose(other))
    }

    pub(crate) fn compose(&self, other: &WeylElement) -> WeylElement {
        let n = self.rank();
        WeylElement::from_parts(
            self.sys.clone(),
            mat_mul(n, &self.mat, &other.mat),
            mat_mul(n, &other.inv, &self.inv),
        )
    }

    pub fn inverse(&self) -> WeylElement {
        WeylElement::from_parts(self.sys.clone(), self.inv.clone(), self.mat.clone())
    }

    /// `w s`.
    pub fn times_gen(&self, s: usize) -> WeylElement {
        let n = self.rank();
        let g = &self.sys.simple[s];
        WeylElement::from_parts(
            self.sys.clone(),
            mat_mul(n, &self.mat, g),
            mat_mul(n, g, &self.inv),
        )
    }

    /// `s w`.
    pub fn gen_times(&self, s: usize) -> WeylElement {
        let n = self.rank();
        let g = &self.sys.simple[s];
        WeylElement::from_parts(
            self.sys.clone(),
            mat_mul(n, g, &self.mat),
            mat_mul(n, &self.inv, g),
        )
    }

    fn column_negative(m: &[i64], n: usize, s: usize) -> bool {
        (0..n).any(|i| m[i * n + s] < 0)
    }

    /// `ℓ(ws) < ℓ(w)`, i.e. `w(α_s)` is negative.
    pub fn has_right_descent(&self, s: usize) -> bool {
        Self::column_negative(&self.mat, self.rank(), s)
    }

    /// `ℓ(sw) < ℓ(w)`, i.e. `w⁻¹(α_s)` is negative.
    pub fn has_left_descent(&self, s: usize) -> bool {
        Self::column_negative(&self.inv, self.rank(), s)
    }

    pub fn is_identity(&self) -> bool {
        self.mat == identity_matrix(self.rank())
    }

    /// ShortLex-minimal reduced word, by repeatedly stripping the smallest
    /// left descent.
    pub fn reduced_word(&self) -> &[u8] {
        self.word.get_or_init(|| {
            let mut word = Vec::new();
            let mut w = self.clone();
            while !w.is_identity() {
                let s = (0..w.rank())
                    .find(|&s| w.has_left_descent(s))
                    .expect("a non-identity element has a left descent");
                word.push(s as u8);
                w = w.gen_times(s);
            }
            word
        })
    }

    pub fn length(&self) -> usize {
        self.reduced_word().len()
    }

    /// `w · r` for a root `r`.
    pub fn act(&self, r: &Root) -> Result<Root> {
        let n = self.rank();
        let coords = (0..n)
            .map(|i| {
                (0..n).fold(0i64, |acc, j| {
                    ck_add(acc, ck_mul(self.mat[i * n + j], r.coords[j]))
                })
            })
            .collect();
        Root::new(coords)
    }

    /// Whether this element, viewed as a chamber of the thin building, lies in
    /// the root (half-apartment) `r`: `w ∈ r` iff `w⁻¹ r` is positive.
    pub fn root_contains(&self, r: &Root) -> Result<bool> {
        Ok(self.inverse().act(r)?.is_positive())
    }

    /// Sign coherence of every column: each `w(α_s)` is a positive or negative root.
    pub fn is_sign_coherent(&self) -> bool {
        let n = self.rank();
        (0..n).all(|j| {
            let col = (0..n).map(|i| self.mat[i * n + j]);
            col.clone().all(|x| x >= 0) || col.clone().all(|x| x <= 0)
        })
    }
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}
impl Eq for WeylElement {}

impl std::hash::Hash for WeylElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.mat.hash(state);
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeylElement({self})")
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.reduced_word();
        if w.is_empty() {
            return f.write_str("1");
        }
        for (i, s) in w.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "s{}", s + 1)?;
        }
        Ok(())
    }
}

/// A real root in simple-root coordinates; never of mixed sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Root {
    coords: Vec<i64>,
}

impl Root {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        let pos = coords.iter().all(|&x| x >= 0);
        let neg = coords.iter().all(|&x| x <= 0);
        if !(pos || neg) {
            return Err(structural(format!(
                "mixed-sign root coordinates {coords:?}"
            )));
        }
        if coords.iter().all(|&x| x == 0) {
            return Err(structural("zero vector is not a root"));
        }
        Ok(Root { coords })
    }
    pub fn coords(&self) -> &[i64] {
        &self.coords
    }
    pub fn is_positive(&self) -> bool {
        self.coords.iter().all(|&x| x >= 0)
    }
    pub fn negated(&self) -> Root {
        Root {
            coords: self.coords.iter().map(|x| -x).collect(),
        }
    }
    /// Sum of the absolute values of the coordinates.
    pub fn height(&self) -> i64 {
        self.coords.iter().map(|x| x.abs()).sum()
    }
}

impl TryFrom<Vec<i64>> for Root {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Root::new(v)
    }
}

impl From<Root> for Vec<i64> {
    fn from(r: Root) -> Self {
        r.coords
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub type ElemId = u32;
pub const NO_ELEM: ElemId = u32::MAX;

/// Enumerated elements of `W` (all of it when finite, otherwise a ball around
/// `1_W`) with generator multiplication tables.
///
/// Ids are assigned in breadth-first order, so id 0 is `1_W` and lengths are
/// non-decreasing in the id.
pub struct WeylTable {
    sys: Arc<CoxeterSystem>,
    elems: Vec<WeylElement>,
    index: HashMap<Vec<i64>, ElemId>,
    len: Vec<u32>,
    right: Vec<ElemId>,
    left: Vec<ElemId>,
    inv: Vec<ElemId>,
    support: Vec<GenSet>,
    parent: Vec<(ElemId, u8)>,
    complete: bool,
    radius: Option<usize>,
    longest: Option<ElemId>,
    mul: Option<Vec<ElemId>>,
}

const FULL_TABLE_BOUND: usize = 100_000;

impl WeylTable {
    /// The whole group; fails for infinite `W`.
    pub fn full(sys: Arc<CoxeterSystem>) -> Result<Self> {
        let t = Self::enumerate(sys, None, FULL_TABLE_BOUND);
        if !t.complete {
            return Err(Error::Unsupported(
                "W is infinite (or larger than the enumeration bound)".into(),
            ));
        }
        Ok(t)
    }

    /// All elements of length at most `radius`.
    pub fn ball(sys: Arc<CoxeterSystem>, radius: usize) -> Self {
        Self::enumerate(sys, Some(radius), usize::MAX)
    }

    fn enumerate(sys: Arc<CoxeterSystem>, radius: Option<usize>, bound: usize) -> Self {
        let n = sys.rank();
        let id = sys.identity();
        let mut index = HashMap::from([(id.mat.clone(), 0u32)]);
        let mut elems = vec![id];
        let mut len = vec![0u32];
        let mut parent = vec![(NO_ELEM, 0u8)];
        let mut support = vec![GenSet::EMPTY];
        let mut right: Vec<ElemId> = Vec::new();
        let mut head = 0;
        let mut complete = true;
        while head < elems.len() {
            let w = elems[head].clone();
            for s in 0..n {
                let ws = w.times_gen(s);
                let next = match index.get(&ws.mat) {
                    Some(&k) => k,
                    None => {
                        let l = len[head] + 1;
                        if radius.is_some_and(|r| l as usize > r) || elems.len() >= bound {
                            complete = false;
                            right.push(NO_ELEM);
                            continue;
                        }
                        let k = elems.len() as ElemId;
                        index.insert(ws.mat.clone(), k);
                        elems.push(ws);
                        len.push(l);
                        parent.push((head as ElemId, s as u8));
                        support.push(support[head].with(s));
                        k
                    }
                };
                right.push(next);
            }
            head += 1;
        }
        let count = elems.len();
        let mut left = vec![NO_ELEM; count * n];
        let mut inv = vec![NO_ELEM; count];
        for (k, w) in elems.iter().enumerate() {
            for s in 0..n {
                if let Some(&j) = index.get(&w.gen_times(s).mat) {
                    left[k * n + s] = j;
                }
            }
            if let Some(&j) = index.get(&w.inv) {
                inv[k] = j;
            }
        }
        let longest = if complete {
            Some((count - 1) as ElemId)
        } else {
            None
        };
        let mut table = WeylTable {
            sys,
            elems,
            index,
            len,
            right,
            left,
            inv,
            support,
            parent,
            complete,
            radius,
            longest,
            mul: None,
        };
        if complete && count <= 2048 {
            let mut mul = vec![NO_ELEM; count * count];
            for a in 0..count {
                for b in 0..count {
                    mul[a * count + b] = table.mul_by_word(a as ElemId, b as ElemId);
                }
            }
            table.mul = Some(mul);
        }
        table
    }

    pub fn system(&self) -> &Arc<CoxeterSystem> {
        &self.sys
    }
    pub fn rank(&self) -> usize {
        self.sys.rank()
    }
    pub fn len(&self) -> usize {
        self.elems.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
    pub fn is_complete(&self) -> bool {
        self.complete
    }
    pub fn radius(&self) -> Option<usize> {
        self.radius
    }
    pub fn elements(&self) -> &[WeylElement] {
        &self.elems
    }
    pub fn element(&self, id: ElemId) -> &WeylElement {
        &self.elems[id as usize]
    }
    pub fn id_of(&self, w: &WeylElement) -> Option<ElemId> {
        self.index.get(&w.mat).copied()
    }
    pub fn length(&self, id: ElemId) -> usize {
        self.len[id as usize] as usize
    }
    pub fn identity(&self) -> ElemId {
        0
    }
    /// `r_S`, when `W` is finite.
    pub fn longest(&self) -> Option<ElemId> {
        self.longest
    }
    pub fn generator(&self, s: usize) -> ElemId {
        self.right[s]
    }
    pub fn right_mul_gen(&self, w: ElemId, s: usize) -> ElemId {
        self.right[w as usize * self.rank() + s]
    }
    pub fn left_mul_gen(&self, s: usize, w: ElemId) -> ElemId {
        self.left[w as usize * self.rank() + s]
    }
    pub fn inverse(&self, w: ElemId) -> ElemId {
        self.inv[w as usize]
    }
    /// Set of generators occurring in (any) reduced word of `w`.
    pub fn support(&self, w: ElemId) -> GenSet {
        self.support[w as usize]
    }
    pub fn in_parabolic(&self, w: ElemId, j: GenSet) -> bool {
        self.support(w).is_subset(j)
    }

    /// A reduced word for `w` (the breadth-first spanning tree word).
    pub fn word(&self, w: ElemId) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = w;
        while cur != 0 {
            let (p, s) = self.parent[cur as usize];
            out.push(s as usize);
            cur = p;
        }
        out.reverse();
        out
    }

    fn mul_by_word(&self, a: ElemId, b: ElemId) -> ElemId {
        let mut cur = a;
        for s in self.word(b) {
            if cur == NO_ELEM {
                return NO_ELEM;
            }
            cur = self.right_mul_gen(cur, s);
        }
        cur
    }

    /// `a · b`, or `None` when the product leaves an incomplete table.
    pub fn try_mul(&self, a: ElemId, b: ElemId) -> Option<ElemId> {
        let r = match &self.mul {
            Some(m) => m[a as usize * self.len() + b as usize],
            None => self.mul_by_word(a, b),
        };
        (r != NO_ELEM).then_some(r)
    }

    pub fn mul(&self, a: ElemId, b: ElemId) -> ElemId {
        self.try_mul(a, b)
            .expect("product outside the enumerated part of W")
    }
}

impl fmt::Debug for WeylTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeylTable")
            .field("rank", &self.rank())
            .field("len", &self.len())
            .field("complete", &self.complete)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(name: &str) -> Arc<CoxeterSystem> {
        CoxeterSystem::named(name).unwrap()
    }

    /// Brute-force group enumeration by closure of words, independent of the
    /// table code.
    fn brute_force_order(s: &Arc<CoxeterSystem>) -> usize {
        let mut seen = vec![s.identity()];
        let mut grew = true;
        while grew {
            grew = false;
            let snapshot = seen.clone();
            for w in &snapshot {
                for g in 0..s.rank() {
                    let x = w.times_gen(g);
                    if !seen.contains(&x) {
                        seen.push(x);
                        grew = true;
                    }
                }
            }
        }
        seen.len()
    }

    #[test]
    fn involutions_and_small_products() {
        let a2 = sys("A2");
        let s1 = a2.generator(0).unwrap();
        let s2 = a2.generator(1).unwrap();
        assert!(s1.multiply(&s1).unwrap().is_identity());
        assert_eq!(s1.multiply(&s2).unwrap().length(), 2);

        let c2 = sys("C2");
        let st = c2.from_word(&[0, 1]).unwrap();
        let mut p = c2.identity();
        for k in 1..=4 {
            p = p.multiply(&st).unwrap();
            assert_eq!(p.is_identity(), k == 4);
        }
    }

    #[test]
    fn mismatched_systems_are_rejected() {
        let a = sys("A2").generator(0).unwrap();
        let b = sys("C2").generator(0).unwrap();
        assert!(matches!(a.multiply(&b), Err(Error::Structural(_))));
    }

    #[test]
    fn group_orders_match_brute_force() {
        for (name, order) in [("A2", 6), ("C2", 8), ("G2", 12), ("A3", 24), ("C3", 48)] {
            let s = sys(name);
            assert_eq!(brute_force_order(&s), order, "{name}");
            assert_eq!(WeylTable::full(s).unwrap().len(), order, "{name}");
        }
    }

    #[test]
    fn longest_elements() {
        let a2 = sys("A2");
        let w0 = a2.longest_element(GenSet::full(2)).unwrap();
        assert_eq!(w0.length(), 3);
        assert_eq!(w0.reduced_word(), &[0, 1, 0]);
        assert_eq!(
            sys("C2").longest_element(GenSet::full(2)).unwrap().length(),
            4
        );
        assert_eq!(
            sys("C3").longest_element(GenSet::full(3)).unwrap().length(),
            9
        );
        assert_eq!(
            a2.longest_element(GenSet::single(1)).unwrap(),
            a2.generator(1).unwrap()
        );
        assert!(matches!(
            sys("~A2").longest_element(GenSet::full(3)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn longest_element_is_max_of_enumeration() {
        for name in ["A2", "C2", "G2", "A3", "C3"] {
            let s = sys(name);
            let all = s.enumerate_parabolic(GenSet::full(s.rank()), 1000).unwrap();
            let max = all.iter().map(WeylElement::length).max().unwrap();
            let w0 = s.longest_element(GenSet::full(s.rank())).unwrap();
            assert_eq!(w0.length(), max);
            assert!(w0.multiply(&w0).unwrap().is_identity());
            for w in &all {
                assert_eq!(w0.multiply(w).unwrap().length(), w0.length() - w.length());
            }
        }
    }

    #[test]
    fn sphericity() {
        let a2t = sys("~A2");
        assert!(a2t.is_spherical(GenSet::EMPTY));
        assert!(!a2t.is_spherical(GenSet::full(3)));
        assert!(a2t.is_spherical(GenSet::pair(0, 2)));
        let c2 = sys("C2");
        assert!(c2.is_spherical(GenSet::full(2)));
        assert_eq!(
            c2.enumerate_parabolic(GenSet::full(2), 100).unwrap().len(),
            8
        );
        assert!(!sys("~C2").is_spherical(GenSet::full(3)));
        assert!(!sys("~G2").is_spherical(GenSet::full(3)));
    }

    #[test]
    fn exchange_examples() {
        let a2 = sys("A2");
        let w = a2.from_word(&[0, 1, 0]).unwrap();
        assert_eq!(
            a2.check_exchange_variant(&w, 0, 0).unwrap(),
            ExchangeOutcome::LengthDrop2
        );
        let a1a1 = sys("A1xA1");
        let w = a1a1.from_word(&[0, 1]).unwrap();
        assert_eq!(
            a1a1.check_exchange_variant(&w, 0, 1).unwrap(),
            ExchangeOutcome::LengthDrop2
        );
        assert!(a2.check_exchange_variant(&a2.identity(), 0, 0).is_err());
    }

    #[test]
    fn exchange_dichotomy_exhaustive_c2() {
        let c2 = sys("C2");
        let all = c2.enumerate_parabolic(GenSet::full(2), 100).unwrap();
        let mut seen_equal = false;
        for w in &all {
            for s in 0..2 {
                for t in 0..2 {
                    if w.has_left_descent(s) && w.has_right_descent(t) {
                        let out = c2.check_exchange_variant(w, s, t).unwrap();
                        seen_equal |= out == ExchangeOutcome::Equal;
                    }
                }
            }
        }
        // s1 s2 s1 s2 with s = s1, t = s2 realizes swt = w in the dihedral group of order 8.
        assert!(seen_equal);
    }

    #[test]
    fn length_counts_inversions() {
        for name in ["A2", "C2", "G2", "A3", "C3"] {
            let s = sys(name);
            let roots = s.all_roots().unwrap();
            let positive: Vec<&Root> = roots.iter().filter(|r| r.is_positive()).collect();
            assert_eq!(
                positive.len(),
                s.longest_element(GenSet::full(s.rank())).unwrap().length()
            );
            let table = WeylTable::full(s.clone()).unwrap();
            for (id, w) in table.elements().iter().enumerate() {
                let inversions = positive
                    .iter()
                    .filter(|r| !w.act(r).unwrap().is_positive())
                    .count();
                assert_eq!(w.length(), inversions);
                assert_eq!(table.length(id as ElemId), inversions);
                assert!(w.is_sign_coherent());
            }
        }
    }

    #[test]
    fn reduced_word_is_shortlex_minimal() {
        let a3 = sys("A3");
        let table = WeylTable::full(a3.clone()).unwrap();
        // Brute force: the lexicographically smallest word of minimal length.
        for w in table.elements() {
            let l = w.length();
            let mut best: Option<Vec<u8>> = None;
            let mut word = vec![0u8; l];
            loop {
                let ws: Vec<usize> = word.iter().map(|&x| x as usize).collect();
                if a3.from_word(&ws).unwrap() == *w {
                    best = Some(word.clone());
                    break;
                }
                // next word in lex order
                let mut i = l;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if word[i] < 2 {
                        word[i] += 1;
                        for x in word.iter_mut().skip(i + 1) {
                            *x = 0;
                        }
                        break;
                    }
                    if i == 0 {
                        i = usize::MAX;
                        break;
                    }
                }
                if i == usize::MAX || l == 0 {
                    break;
                }
            }
            if l == 0 {
                assert!(w.reduced_word().is_empty());
            } else {
                assert_eq!(w.reduced_word(), best.unwrap().as_slice());
            }
        }
    }

    fn brute_order(s: &Arc<CoxeterSystem>, a: &Root, b: &Root, cap: u32) -> Order {
        let p = s
            .reflection(a)
            .unwrap()
            .multiply(&s.reflection(b).unwrap())
            .unwrap();
        let mut cur = p.clone();
        for k in 1..=cap {
            if cur.is_identity() {
                return Order::Finite(k);
            }
            cur = cur.multiply(&p).unwrap();
        }
        Order::Infinite
    }

    #[test]
    fn reflection_orders() {
        let a2 = sys("A2");
        let c2 = sys("C2");
        let a1a1 = sys("A1xA1");
        assert_eq!(
            a1a1.reflection_product_order(&a1a1.simple_root(0), &a1a1.simple_root(1))
                .unwrap(),
            Order::Finite(2)
        );
        assert_eq!(
            a2.reflection_product_order(&a2.simple_root(0), &a2.simple_root(1))
                .unwrap(),
            Order::Finite(3)
        );
        assert_eq!(
            c2.reflection_product_order(&c2.simple_root(0), &c2.simple_root(1))
                .unwrap(),
            Order::Finite(4)
        );
        let t = sys("~A2");
        assert_eq!(
            t.reflection_product_order(&t.simple_root(0), &t.simple_root(1))
                .unwrap(),
            Order::Finite(3)
        );
        // α1 and its translate α1 + δ = s1 s2 (α3): parallel walls.
        let a = t.simple_root(0);
        let b = t
            .from_word(&[0, 1])
            .unwrap()
            .act(&t.simple_root(2))
            .unwrap();
        assert_eq!(b.coords(), &[2, 1, 1]);
        let c = t.pairing(a.coords(), &b).unwrap() * t.pairing(b.coords(), &a).unwrap();
        assert!(c >= 4);
        assert_eq!(t.reflection_product_order(&a, &b).unwrap(), Order::Infinite);
        assert_eq!(brute_order(&t, &a, &b, 60), Order::Infinite);
        assert!(t.reflection_product_order(&a, &a.negated()).is_err());
    }

    #[test]
    fn reflecting_a_root_in_itself_negates_it() {
        let c3 = sys("C3");
        for r in c3.all_roots().unwrap() {
            assert_eq!(c3.reflect(&r, &r).unwrap(), r.negated());
        }
    }

    #[test]
    fn root_interval_examples() {
        let a2 = sys("A2");
        let (a1, a2r) = (a2.simple_root(0), a2.simple_root(1));
        let both = a2.root_interval(&a1, &a2r).unwrap();
        assert_eq!(both.len(), 3);
        assert!(both.iter().all(Root::is_positive));
        let b = a2.generator(0).unwrap().act(&a2r).unwrap();
        assert_eq!(a2.root_interval(&a1, &b).unwrap().len(), 2);
        assert!(a2.root_interval(&a1, &a1).is_err());
        assert!(a2.root_interval(&a1, &a1.negated()).is_err());
        let c2 = sys("C2");
        assert_eq!(
            c2.root_interval(&c2.simple_root(0), &c2.simple_root(1))
                .unwrap()
                .len(),
            4
        );
        assert!(matches!(
            sys("~A2").root_interval(&a1_of("~A2"), &sys("~A2").simple_root(1)),
            Err(Error::Unsupported(_))
        ));
    }

    fn a1_of(name: &str) -> Root {
        sys(name).simple_root(0)
    }

    #[test]
    fn parse_text_format() {
        let m = CoxeterMatrix::parse("3\n3 2\n4\n").unwrap();
        assert_eq!(m, {
            let mut x = CoxeterMatrix::named("C3").unwrap();
            x.name = None;
            x
        });
        let inf = CoxeterMatrix::parse("2\ninf").unwrap();
        assert_eq!(inf.m(0, 1), Order::Infinite);
        assert!(CoxeterMatrix::parse("2\n5").is_err());
        assert!(CoxeterMatrix::parse("3\n3").is_err());
    }

    #[test]
    fn ball_tables_track_lengths() {
        let t = sys("~A2");
        let ball = WeylTable::ball(t.clone(), 4);
        assert!(!ball.is_complete());
        for (id, w) in ball.elements().iter().enumerate() {
            assert_eq!(ball.length(id as ElemId), w.length());
            assert!(w.is_sign_coherent());
        }
        // Growth of ~A2: 1, 3, 6, 9, 12 elements of length 0..4.
        assert_eq!(ball.len(), 1 + 3 + 6 + 9 + 12);
    }
}
