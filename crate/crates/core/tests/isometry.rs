use std::sync::Arc;

use proptest::prelude::*;
use twinbuild::building::Chamber;
use twinbuild::isometry::{
    check_isometry, extend_germ, extend_to_minus, identity_on, is_admissible, isometry_extensions,
    phi_s_transport, Isometry,
};
use twinbuild::twin::{Sign, TwinBuilding, TwinChamber};
use twinbuild::{zoo, GenSet};

fn compose(a: &[Chamber], b: &[Chamber]) -> Vec<Chamber> {
    a.iter().map(|&x| b[x as usize]).collect()
}

/// The twin building and the diagonal action of a product of group generators.
fn twin_with_element(name: &str, word: &[usize]) -> (TwinBuilding, Vec<Chamber>) {
    let fb = zoo::build(name).unwrap();
    let gens = fb.building.automorphisms().to_vec();
    let mut g: Vec<Chamber> = (0..fb.building.num_chambers() as Chamber).collect();
    for &k in word {
        g = compose(&g, &gens[k % gens.len()]);
    }
    (TwinBuilding::self_twin(Arc::new(fb.building)).unwrap(), g)
}

#[test]
fn opposition_criterion_matches_admissibility_on_c2q2() {
    let (t, g) = twin_with_element("C2q2", &[0, 1, 3, 2, 1]);
    assert!(g.iter().enumerate().any(|(i, &y)| i as Chamber != y));
    let phi = Isometry::on_plus(&g);
    let mut admissible = 0;
    for x in t.building().chambers() {
        let image: Vec<Chamber> = t
            .opposite(TwinChamber::minus(x))
            .iter()
            .map(|&y| g[y as usize])
            .collect();
        for x2 in t.building().chambers() {
            let opp2 = t.opposite(TwinChamber::minus(x2));
            let criterion = image.iter().all(|y| opp2.contains(y));
            let adm = is_admissible(&t, &t, &phi, TwinChamber::minus(x), TwinChamber::minus(x2));
            assert_eq!(criterion, adm, "-{x} -{x2}");
            admissible += usize::from(adm);
        }
    }
    assert_eq!(admissible, 45);
}

#[test]
fn c3q2_extension_recovers_the_group_action() {
    let (t, g) = twin_with_element("C3q2", &[0, 2, 5, 1, 4, 3, 0]);
    let phi = extend_to_minus(&t, &t, &Isometry::on_plus(&g), 11, g[11]).unwrap();
    assert_eq!(phi.half(Sign::Minus).unwrap(), g);
}

#[test]
fn c2q2_extension_is_an_isometry() {
    let (t, g) = twin_with_element("C2q2", &[1, 2, 0]);
    let phi = extend_to_minus(&t, &t, &Isometry::on_plus(&g), 0, g[0]).unwrap();
    assert!(check_isometry(&t, &t, &phi).is_empty());
    assert_eq!(phi.half(Sign::Minus).unwrap(), g);
}

#[test]
fn c3q2_transport_is_independent_of_the_anchor() {
    let (t, g) = twin_with_element("C3q2", &[3, 1, 2]);
    let phi = Isometry::on_plus(&g);
    for (c, s) in [(0, 0), (100, 2)] {
        let opp = t.opposite(TwinChamber::minus(c));
        assert_eq!(opp.len(), 512);
        let first = phi_s_transport(&t, &t, &phi, c, g[c as usize], opp[0], s).unwrap();
        for &x in &opp[1..] {
            assert_eq!(
                phi_s_transport(&t, &t, &phi, c, g[c as usize], x, s).unwrap(),
                first
            );
        }
        assert!(first.iter().all(|&(d, d2)| g[d as usize] == d2));
    }
}

#[test]
fn identity_transport_is_the_identity() {
    let (t, _) = twin_with_element("A3q2", &[]);
    let phi = Isometry::on_plus(&(0..315).collect::<Vec<_>>());
    let x = t.opposite(TwinChamber::minus(5))[3];
    for s in 0..3 {
        for (d, d2) in phi_s_transport(&t, &t, &phi, 5, 5, x, s).unwrap() {
            assert_eq!(d, d2);
        }
    }
}

fn rigidity(name: &str, c: Chamber) {
    let (t, _) = twin_with_element(name, &[]);
    let mut fixed: Vec<TwinChamber> = t
        .building()
        .e_k_neighborhood(c, 1)
        .unwrap()
        .into_iter()
        .map(TwinChamber::plus)
        .collect();
    fixed.push(TwinChamber::minus(t.opposite(TwinChamber::plus(c))[0]));
    let partial = identity_on(&t, &fixed);
    let all = isometry_extensions(&t, &t, &partial, 2).unwrap();
    assert_eq!(all.len(), 1);
    for sign in Sign::both() {
        let half = all[0].half(sign).unwrap();
        assert!(half.iter().enumerate().all(|(i, &y)| i as Chamber == y));
    }
}

#[test]
fn c2q2_isometry_fixing_a_panel_star_and_an_opposite_chamber_is_trivial() {
    rigidity("C2q2", 3);
}

#[test]
fn c3q2_isometry_fixing_a_panel_star_and_an_opposite_chamber_is_trivial() {
    rigidity("C3q2", 0);
}

#[test]
fn non_opposite_minus_chamber_does_not_force_rigidity() {
    let (t, _) = twin_with_element("C2q2", &[]);
    let mut fixed: Vec<TwinChamber> = t
        .building()
        .e_k_neighborhood(0, 1)
        .unwrap()
        .into_iter()
        .map(TwinChamber::plus)
        .collect();
    let near = t
        .building()
        .chambers()
        .find(|&y| t.dist(0, y) == 1)
        .unwrap();
    fixed.push(TwinChamber::minus(near));
    let all = isometry_extensions(&t, &t, &identity_on(&t, &fixed), 3).unwrap();
    assert!(all.len() > 1);
}

#[test]
fn germ_on_rank2_star_extends_to_the_group_action() {
    let (t, g) = twin_with_element("A3q2", &[2, 0, 1]);
    let mut germ = Isometry::empty(t.num_chambers());
    for x in t.building().e_k_neighborhood(9, 2).unwrap() {
        germ.insert(TwinChamber::plus(x), TwinChamber::plus(g[x as usize]))
            .unwrap();
    }
    germ.insert(TwinChamber::minus(40), TwinChamber::minus(g[40]))
        .unwrap();
    let phi = extend_germ(&t, &t, &germ).unwrap();
    assert_eq!(phi.half(Sign::Plus).unwrap(), g);
    assert_eq!(phi.half(Sign::Minus).unwrap(), g);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isometries_commute_with_projections(
        word in proptest::collection::vec(0usize..8, 0..6),
        x in 0u32..45,
        rep in 0u32..45,
        j in 0usize..3,
        xs in any::<bool>(),
        rs in any::<bool>(),
    ) {
        let (t, g) = twin_with_element("C2q2", &word);
        let sign = |b: bool| if b { Sign::Plus } else { Sign::Minus };
        let jset = [GenSet::single(0), GenSet::single(1), GenSet::full(2)][j];
        let r = t.residue(sign(rs), jset, rep);
        let r2 = t.residue(sign(rs), jset, g[rep as usize]);
        let xc = TwinChamber { sign: sign(xs), id: x };
        let img = g[t.proj(xc, &r) as usize];
        prop_assert_eq!(img, t.proj(TwinChamber { sign: xc.sign, id: g[x as usize] }, &r2));
    }

    #[test]
    fn isometries_transport_through_opposite_panels(
        word in proptest::collection::vec(0usize..8, 0..6),
        x in 0u32..45,
        s in 0usize..2,
        k in 0usize..8,
    ) {
        let (t, g) = twin_with_element("C2q2", &word);
        let r = t.panel(Sign::Plus, s, x);
        let opp: Vec<_> = t.panels(Sign::Minus).into_iter().filter(|q| t.residues_opposite(&r, q)).collect();
        let q = opp[k % opp.len()];
        let r2 = t.panel(Sign::Plus, s, g[x as usize]);
        let q2 = t.panel(Sign::Minus, s, g[q.rep as usize]);
        let through = t.proj(TwinChamber::plus(x), &q);
        let expected = t.proj(TwinChamber::minus(g[through as usize]), &r2);
        prop_assert_eq!(g[x as usize], expected);
        prop_assert!(t.residues_opposite(&r2, &q2));
    }
}
