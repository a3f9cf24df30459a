//! Isometries between self-twins: admissible pairs, the transport maps
//! `φ_s^x`, extension from the plus half to the minus half, and rigidity.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::building::Chamber;
use crate::coxeter::ElemId;
use crate::error::{domain, structural, Error, Result};
use crate::twin::{Sign, TwinBuilding, TwinChamber};

/// A partial map between the chambers of two twin buildings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isometry {
    n: usize,
    image: [Vec<Option<Chamber>>; 2],
    hit: [Vec<bool>; 2],
    order: Vec<TwinChamber>,
}

/// Serialized form: a list of chamber pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsometryPairs {
    pub pairs: Vec<(TwinChamber, TwinChamber)>,
}

fn slot(sign: Sign) -> usize {
    match sign {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

impl Isometry {
    /// The empty map between twin buildings with `n` chambers per half.
    pub fn empty(n: usize) -> Self {
        Isometry {
            n,
            image: [vec![None; n], vec![None; n]],
            hit: [vec![false; n], vec![false; n]],
            order: Vec::new(),
        }
    }

    /// The map acting by `perm` on both halves.
    pub fn diagonal(perm: &[Chamber]) -> Self {
        let mut phi = Isometry::empty(perm.len());
        for sign in Sign::both() {
            for (x, &y) in perm.iter().enumerate() {
                phi.insert(
                    TwinChamber {
                        sign,
                        id: x as Chamber,
                    },
                    TwinChamber { sign, id: y },
                )
                .expect("a permutation is injective");
            }
        }
        phi
    }

    pub fn identity(n: usize) -> Self {
        Isometry::diagonal(&(0..n as Chamber).collect::<Vec<_>>())
    }

    /// `perm` on the plus half only.
    pub fn on_plus(perm: &[Chamber]) -> Self {
        let mut phi = Isometry::empty(perm.len());
        for (x, &y) in perm.iter().enumerate() {
            phi.insert(TwinChamber::plus(x as Chamber), TwinChamber::plus(y))
                .expect("a permutation is injective");
        }
        phi
    }

    pub fn chambers_per_half(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: TwinChamber) -> Option<TwinChamber> {
        self.image[slot(x.sign)]
            .get(x.id as usize)
            .copied()
            .flatten()
            .map(|id| TwinChamber { sign: x.sign, id })
    }

    pub fn contains(&self, x: TwinChamber) -> bool {
        self.get(x).is_some()
    }

    pub fn in_image(&self, y: TwinChamber) -> bool {
        self.hit[slot(y.sign)]
            .get(y.id as usize)
            .copied()
            .unwrap_or(false)
    }

    /// Adds `x ↦ y`. Fails on sign change, out-of-range ids, a conflicting
    /// image, or a repeated image.
    pub fn insert(&mut self, x: TwinChamber, y: TwinChamber) -> Result<()> {
        if x.sign != y.sign {
            return Err(domain(format!("{x} ↦ {y} changes sign")));
        }
        if x.id as usize >= self.n || y.id as usize >= self.n {
            return Err(domain(format!("{x} ↦ {y} is out of range")));
        }
        if let Some(old) = self.get(x) {
            return if old == y {
                Ok(())
            } else {
                Err(domain(format!("{x} already maps to {old}")))
            };
        }
        if self.in_image(y) {
            return Err(domain(format!("{y} is already an image")));
        }
        self.image[slot(x.sign)][x.id as usize] = Some(y.id);
        self.hit[slot(y.sign)][y.id as usize] = true;
        self.order.push(x);
        Ok(())
    }

    /// Undoes the most recent insertion.
    pub fn remove_last(&mut self) -> Option<TwinChamber> {
        let x = self.order.pop()?;
        let y = self.image[slot(x.sign)][x.id as usize]
            .take()
            .expect("in domain");
        self.hit[slot(x.sign)][y as usize] = false;
        Some(x)
    }

    /// Domain chambers in insertion order.
    pub fn domain(&self) -> &[TwinChamber] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_total_on(&self, sign: Sign) -> bool {
        self.image[slot(sign)].iter().all(Option::is_some)
    }

    /// The map on one half as a vector, if total there.
    pub fn half(&self, sign: Sign) -> Option<Vec<Chamber>> {
        self.image[slot(sign)].iter().copied().collect()
    }

    pub fn pairs(&self) -> IsometryPairs {
        let mut pairs: Vec<(TwinChamber, TwinChamber)> = self
            .order
            .iter()
            .map(|&x| (x, self.get(x).expect("in domain")))
            .collect();
        pairs.sort();
        IsometryPairs { pairs }
    }

    /// Text form: one `x y` pair per line, chambers written `+id` or `-id`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in self.pairs().pairs {
            writeln!(out, "{x} {y}").unwrap();
        }
        out
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut phi = Isometry::empty(n);
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(perr(format!("expected two chambers, got {line:?}")));
            }
            let x =
                parse_chamber(toks[0]).ok_or_else(|| perr(format!("bad chamber {:?}", toks[0])))?;
            let y =
                parse_chamber(toks[1]).ok_or_else(|| perr(format!("bad chamber {:?}", toks[1])))?;
            phi.insert(x, y).map_err(|e| perr(e.to_string()))?;
        }
        Ok(phi)
    }
}

fn parse_chamber(tok: &str) -> Option<TwinChamber> {
    let (sign, rest) = match tok.as_bytes().first()? {
        b'+' => (Sign::Plus, &tok[1..]),
        b'-' => (Sign::Minus, &tok[1..]),
        _ => return None,
    };
    Some(TwinChamber {
        sign,
        id: rest.parse().ok()?,
    })
}

fn ensure_compatible(t: &TwinBuilding, t2: &TwinBuilding) -> Result<()> {
    if t.building().system().matrix() != t2.building().system().matrix() {
        return Err(domain("the twin buildings have different Coxeter types"));
    }
    if t.num_chambers() != t2.num_chambers() {
        return Err(domain("the twin buildings have different sizes"));
    }
    Ok(())
}

/// `δ(x, y)` of the twin building: `δ_ε` within a half, `δ*` across.
pub fn twin_delta(t: &TwinBuilding, x: TwinChamber, y: TwinChamber) -> ElemId {
    if x.sign == y.sign {
        t.delta(x.sign, x.id, y.id)
    } else {
        t.codistance(x, y)
    }
}

/// Whether adjoining `y ↦ y2` to `phi` keeps it an isometry.
///
/// Both self-twins derive every twin distance from the underlying Weyl
/// distance and the signs in the same way, so the comparison runs on the
/// underlying distance rows.
pub fn is_admissible(
    t: &TwinBuilding,
    t2: &TwinBuilding,
    phi: &Isometry,
    y: TwinChamber,
    y2: TwinChamber,
) -> bool {
    if y.sign != y2.sign || ensure_compatible(t, t2).is_err() {
        return false;
    }
    if let Some(img) = phi.get(y) {
        return img == y2;
    }
    if phi.in_image(y2) {
        return false;
    }
    let row = t.building().delta_row(y.id);
    let row2 = t2.building().delta_row(y2.id);
    phi.domain().iter().all(|&x| {
        let x2 = phi.get(x).expect("in domain");
        row[x.id as usize] == row2[x2.id as usize]
    })
}

/// Checks (Iso1)–(Iso3) on the whole domain with the twin distance functions.
pub fn check_isometry(t: &TwinBuilding, t2: &TwinBuilding, phi: &Isometry) -> Vec<String> {
    let mut v = Vec::new();
    if let Err(e) = ensure_compatible(t, t2) {
        v.push(e.to_string());
        return v;
    }
    let dom = phi.domain();
    for (i, &x) in dom.iter().enumerate() {
        let x2 = phi.get(x).expect("in domain");
        if x2.sign != x.sign {
            v.push(format!("(Iso2) {x} ↦ {x2}"));
        }
        for &y in &dom[i..] {
            let y2 = phi.get(y).expect("in domain");
            if twin_delta(t, x, y) != twin_delta(t2, x2, y2) {
                v.push(format!("(Iso3) δ({x}, {y}) ≠ δ'({x2}, {y2})"));
                if v.len() > 20 {
                    return v;
                }
            }
        }
    }
    v
}

/// `φ_s^x`: the panel map `P_s(c−) → P_s(c−')` given by
/// `proj_{P_s(c−')} ∘ φ_+ ∘ proj_{P_s(x)}`, as `(d, d')` pairs.
pub fn phi_s_transport(
    t: &TwinBuilding,
    t2: &TwinBuilding,
    phi: &Isometry,
    c_minus: Chamber,
    c_minus2: Chamber,
    x: Chamber,
    s: usize,
) -> Result<Vec<(Chamber, Chamber)>> {
    ensure_compatible(t, t2)?;
    if s >= t.rank() {
        return Err(domain(format!("generator index {s} out of range")));
    }
    let (cm, cm2, xp) = (
        TwinChamber::minus(c_minus),
        TwinChamber::minus(c_minus2),
        TwinChamber::plus(x),
    );
    if !is_admissible(t, t2, phi, cm, cm2) {
        return Err(domain(format!("({cm}, {cm2}) is not admissible")));
    }
    if !t.is_opposite(xp, cm) {
        return Err(domain(format!("{xp} is not opposite {cm}")));
    }
    let p = t.panel(Sign::Minus, s, c_minus);
    let px = t.panel(Sign::Plus, s, x);
    let p2 = t2.panel(Sign::Minus, s, c_minus2);
    let mut out = Vec::new();
    for &d in t.members(&p) {
        let d1 = t.proj(TwinChamber::minus(d), &px);
        let d2 = phi
            .get(TwinChamber::plus(d1))
            .ok_or_else(|| domain(format!("φ_+ is undefined at +{d1}")))?;
        out.push((d, t2.proj(d2, &p2)));
    }
    let mut images: Vec<Chamber> = out.iter().map(|p| p.1).collect();
    images.sort_unstable();
    images.dedup();
    if images.len() != out.len() || images.as_slice() != t2.members(&p2) {
        return Err(structural("φ_s^x is not a bijection of panels"));
    }
    if !out.contains(&(c_minus, c_minus2)) {
        return Err(structural("φ_s^x does not map c− to c−'"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AnchorChoice {
    Smallest,
    Largest,
}

fn propagate_minus(
    t: &TwinBuilding,
    t2: &TwinBuilding,
    phi_plus: &Isometry,
    c_minus: Chamber,
    c_minus2: Chamber,
    anchor: AnchorChoice,
) -> Result<Isometry> {
    let mut phi = phi_plus.clone();
    let (cm, cm2) = (TwinChamber::minus(c_minus), TwinChamber::minus(c_minus2));
    if !is_admissible(t, t2, &phi, cm, cm2) {
        return Err(domain(format!("({cm}, {cm2}) is not admissible")));
    }
    phi.insert(cm, cm2)?;
    let mut queue = VecDeque::from([c_minus]);
    while let Some(c) = queue.pop_front() {
        let c2 = phi
            .get(TwinChamber::minus(c))
            .expect("queued chambers are mapped")
            .id;
        let opp = t.opposite(TwinChamber::minus(c));
        let x = match anchor {
            AnchorChoice::Smallest => opp[0],
            AnchorChoice::Largest => *opp.last().expect("thick spherical twins have opposites"),
        };
        for s in 0..t.rank() {
            let mut fresh: Vec<(Chamber, Chamber)> = phi_s_transport(t, t2, &phi, c, c2, x, s)?
                .into_iter()
                .filter(|&(d, _)| !phi.contains(TwinChamber::minus(d)))
                .collect();
            fresh.sort_unstable();
            for (d, d2) in fresh {
                let (dm, dm2) = (TwinChamber::minus(d), TwinChamber::minus(d2));
                if !is_admissible(t, t2, &phi, dm, dm2) {
                    return Err(Error::Construction(format!(
                        "propagation dead end: φ_s^x with c = {}, s = s{}, x = +{x} sends {dm} to {dm2}, which is not admissible",
                        TwinChamber::minus(c),
                        s + 1
                    )));
                }
                phi.insert(dm, dm2)?;
                queue.push_back(d);
            }
        }
    }
    if !phi.is_total_on(Sign::Minus) {
        return Err(Error::Construction(
            "the minus half is not connected by panels".into(),
        ));
    }
    Ok(phi)
}

/// Extends an isometry of the plus halves, together with the admissible pair
/// `(c−, c−')`, to all chambers by propagating `φ_s` maps from `c−` in
/// breadth-first order. The result is recomputed with different transport
/// anchors and from a second starting pair and must agree.
pub fn extend_to_minus(
    t: &TwinBuilding,
    t2: &TwinBuilding,
    phi_plus: &Isometry,
    c_minus: Chamber,
    c_minus2: Chamber,
) -> Result<Isometry> {
    ensure_compatible(t, t2)?;
    if !phi_plus.is_total_on(Sign::Plus) {
        return Err(domain("φ_+ must be defined on the whole plus half"));
    }
    let mut plus_only = Isometry::empty(phi_plus.chambers_per_half());
    for &x in phi_plus.domain().iter().filter(|x| x.sign == Sign::Plus) {
        plus_only.insert(x, phi_plus.get(x).expect("in domain"))?;
    }
    let phi = propagate_minus(t, t2, &plus_only, c_minus, c_minus2, AnchorChoice::Smallest)?;
    let other = propagate_minus(t, t2, &plus_only, c_minus, c_minus2, AnchorChoice::Largest)?;
    if other.half(Sign::Minus) != phi.half(Sign::Minus) {
        return Err(structural(
            "extension depends on the choice of transport anchors",
        ));
    }
    let far = (t.num_chambers() - 1) as Chamber;
    let far2 = phi.get(TwinChamber::minus(far)).expect("total").id;
    let again = propagate_minus(t, t2, &plus_only, far, far2, AnchorChoice::Smallest)?;
    if again.half(Sign::Minus) != phi.half(Sign::Minus) {
        return Err(structural("extension depends on the starting pair"));
    }
    Ok(phi)
}

/// Extends a partial isometry to every chamber of one half by adjacency:
/// each new chamber must have exactly one admissible image in the panel of
/// the image of an already mapped neighbour.
pub fn extend_half(
    t: &TwinBuilding,
    t2: &TwinBuilding,
    phi: &mut Isometry,
    sign: Sign,
) -> Result<()> {
    ensure_compatible(t, t2)?;
    let mut queue: VecDeque<Chamber> = phi
        .domain()
        .iter()
        .filter(|x| x.sign == sign)
        .map(|x| x.id)
        .collect();
    if queue.is_empty() {
        return Err(domain(format!("the map has no chamber of the {sign} half")));
    }
    while let Some(c) = queue.pop_front() {
        let c2 = phi.get(TwinChamber { sign, id: c }).expect("mapped").id;
        for s in 0..t.rank() {
            let panel2 = t2.panel(sign, s, c2);
            for &d in t.members(&t.panel(sign, s, c)) {
                let dc = TwinChamber { sign, id: d };
                if phi.contains(dc) {
                    continue;
                }
                let cands: Vec<Chamber> = t2
                    .members(&panel2)
                    .iter()
                    .copied()
                    .filter(|&e| is_admissible(t, t2, phi, dc, TwinChamber { sign, id: e }))
                    .collect();
                match cands.as_slice() {
                    [e] => {
                        phi.insert(dc, TwinChamber { sign, id: *e })?;
                        queue.push_back(d);
                    }
                    [] => return Err(Error::Construction(format!("no admissible image for {dc}"))),
                    _ => return Err(Error::Construction(format!(
                        "{} admissible images for {dc}; the germ does not determine the extension",
                        cands.len()
                    ))),
                }
            }
        }
    }
    Ok(())
}

/// Extends a germ on `E_2(c+) ∪ {c−}` to the plus half by adjacency and then
/// to the minus half by `φ_s` propagation.
pub fn extend_germ(t: &TwinBuilding, t2: &TwinBuilding, germ: &Isometry) -> Result<Isometry> {
    let minus: Vec<TwinChamber> = germ
        .domain()
        .iter()
        .copied()
        .filter(|x| x.sign == Sign::Minus)
        .collect();
    let [cm] = minus.as_slice() else {
        return Err(domain(
            "the germ must contain exactly one chamber of the minus half",
        ));
    };
    let mut phi = germ.clone();
    extend_half(t, t2, &mut phi, Sign::Plus)?;
    extend_to_minus(t, t2, &phi, cm.id, phi.get(*cm).expect("in domain").id)
}

/// All total isometries extending `partial`, up to `limit`, by backtracking
/// over admissible images in breadth-first order.
pub fn isometry_extensions(
    t: &TwinBuilding,
    t2: &TwinBuilding,
    partial: &Isometry,
    limit: usize,
) -> Result<Vec<Isometry>> {
    ensure_compatible(t, t2)?;
    if partial.is_empty() {
        return Err(domain("the partial isometry is empty"));
    }
    let mut order: Vec<(TwinChamber, TwinChamber, usize)> = Vec::new();
    let mut seen = [vec![false; t.num_chambers()], vec![false; t.num_chambers()]];
    let mut queue: VecDeque<TwinChamber> = partial.domain().iter().copied().collect();
    for x in &queue {
        seen[slot(x.sign)][x.id as usize] = true;
    }
    while let Some(x) = queue.pop_front() {
        for s in 0..t.rank() {
            for &d in t.members(&t.panel(x.sign, s, x.id)) {
                if !seen[slot(x.sign)][d as usize] {
                    seen[slot(x.sign)][d as usize] = true;
                    let dc = TwinChamber {
                        sign: x.sign,
                        id: d,
                    };
                    order.push((dc, x, s));
                    queue.push_back(dc);
                }
            }
        }
    }
    for sign in Sign::both() {
        if seen[slot(sign)].iter().any(|b| !b) {
            return Err(domain(format!(
                "the partial isometry has no chamber of the {sign} half"
            )));
        }
    }
    let mut out = Vec::new();
    let mut phi = partial.clone();
    let mut cands: Vec<Vec<Chamber>> = Vec::new();
    let mut i = 0;
    loop {
        if i == order.len() {
            out.push(phi.clone());
            if out.len() >= limit || i == 0 {
                break;
            }
            i -= 1;
            phi.remove_last();
            continue;
        }
        if cands.len() == i {
            let (d, parent, s) = order[i];
            let p2 = phi.get(parent).expect("parents are mapped first");
            let mut list: Vec<Chamber> = t2
                .members(&t2.panel(p2.sign, s, p2.id))
                .iter()
                .copied()
                .filter(|&e| {
                    is_admissible(
                        t,
                        t2,
                        &phi,
                        d,
                        TwinChamber {
                            sign: d.sign,
                            id: e,
                        },
                    )
                })
                .collect();
            list.reverse();
            cands.push(list);
        }
        match cands[i].pop() {
            Some(e) => {
                let d = order[i].0;
                phi.insert(
                    d,
                    TwinChamber {
                        sign: d.sign,
                        id: e,
                    },
                )?;
                i += 1;
            }
            None => {
                cands.pop();
                if i == 0 {
                    break;
                }
                i -= 1;
                phi.remove_last();
            }
        }
    }
    Ok(out)
}

/// `E_k(c)` in one half as a partial identity map.
pub fn identity_on(t: &TwinBuilding, chambers: &[TwinChamber]) -> Isometry {
    let mut phi = Isometry::empty(t.num_chambers());
    for &x in chambers {
        phi.insert(x, x).expect("identity is injective");
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use std::sync::Arc;

    fn twin(name: &str) -> TwinBuilding {
        TwinBuilding::self_twin(Arc::new(zoo::build(name).unwrap().building)).unwrap()
    }

    #[test]
    fn domain_pairs_are_admissible() {
        let t = twin("A2q2");
        let phi = Isometry::identity(t.num_chambers());
        for x in 0..21 {
            assert!(is_admissible(
                &t,
                &t,
                &phi,
                TwinChamber::plus(x),
                TwinChamber::plus(x)
            ));
            assert!(!is_admissible(
                &t,
                &t,
                &phi,
                TwinChamber::plus(x),
                TwinChamber::minus(x)
            ));
        }
        assert!(check_isometry(&t, &t, &phi).is_empty());
    }

    #[test]
    fn violating_pair_is_rejected() {
        let t = twin("A2q2");
        let mut phi = Isometry::empty(21);
        phi.insert(TwinChamber::plus(0), TwinChamber::plus(0))
            .unwrap();
        let far = (0..21).find(|&y| t.dist(0, y) == 3).unwrap();
        assert!(!is_admissible(
            &t,
            &t,
            &phi,
            TwinChamber::plus(far),
            TwinChamber::plus(t.building().neighbors(0, 0)[1])
        ));
        assert!(is_admissible(
            &t,
            &t,
            &phi,
            TwinChamber::plus(far),
            TwinChamber::plus(far)
        ));
    }

    #[test]
    fn text_round_trip() {
        let mut phi = Isometry::empty(5);
        phi.insert(TwinChamber::plus(1), TwinChamber::plus(3))
            .unwrap();
        phi.insert(TwinChamber::minus(4), TwinChamber::minus(0))
            .unwrap();
        let text = phi.to_text();
        assert_eq!(text, "+1 +3\n-4 -0\n");
        assert_eq!(
            Isometry::parse(&text, 5).unwrap().pairs().pairs,
            phi.pairs().pairs
        );
        assert!(Isometry::parse("+1 -3\n", 5).is_err());
        assert!(Isometry::parse("+1\n", 5).is_err());
        assert!(Isometry::parse("+1 +2\n+1 +3\n", 5).is_err());
    }

    #[test]
    fn identity_extends_to_identity() {
        let t = twin("C2q2");
        let id: Vec<Chamber> = (0..45).collect();
        let phi = extend_to_minus(&t, &t, &Isometry::on_plus(&id), 7, 7).unwrap();
        assert_eq!(phi.half(Sign::Minus).unwrap(), id);
        assert!(check_isometry(&t, &t, &phi).is_empty());
    }

    #[test]
    fn non_admissible_start_is_a_domain_error() {
        let t = twin("A2q2");
        let id: Vec<Chamber> = (0..21).collect();
        let wrong = t.building().neighbors(0, 0)[1];
        assert!(matches!(
            extend_to_minus(&t, &t, &Isometry::on_plus(&id), 0, wrong),
            Err(Error::Domain(_))
        ));
    }
}
