use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twinbuild::paths::{
    check_compatible, default_bound, is_wall_connected, verify_anchored_properties,
    verify_path_properties, wall_graph, PanelGraph, Verdict, WallOptions,
};
use twinbuild::twin::{Sign, TwinBuilding, TwinChamber, TwinResidue};
use twinbuild::zoo;
use twinbuild::GenSet;

fn twin(name: &str) -> TwinBuilding {
    TwinBuilding::self_twin(Arc::new(zoo::build(name).unwrap().building)).unwrap()
}

fn type_sequences(
    g: &PanelGraph<'_>,
    p: &TwinResidue,
    q: &TwinResidue,
    max: usize,
) -> BTreeSet<Vec<GenSet>> {
    g.enumerate_compatible_paths(p, q, max)
        .unwrap()
        .into_iter()
        .map(|path| path.types)
        .collect()
}

#[test]
fn anchored_paths_exist_iff_cross_parallel_on_c2q2() {
    let t = twin("C2q2");
    let g = PanelGraph::build(&t, Sign::Plus).unwrap();
    let minus = t.panels(Sign::Minus);
    let plus = g.vertices().to_vec();
    let mut found_some = 0;
    for p in &minus {
        let opposite: Vec<&TwinResidue> =
            plus.iter().filter(|q| t.residues_opposite(p, q)).collect();
        assert!(!opposite.is_empty());
        for q in &plus {
            let mut exists = false;
            for q0 in &opposite {
                if let Some(path) = g.find_anchored_path(p, q0, q).unwrap() {
                    let rep = verify_anchored_properties(&t, &path);
                    assert!(rep.passed(), "{:?}", rep.violations);
                    exists = true;
                }
            }
            assert_eq!(exists, t.cross_parallel(p, q).unwrap(), "{p} {q}");
            found_some += usize::from(exists);
        }
    }
    assert!(found_some > 0);
}

#[test]
fn compatible_paths_with_codistance_condition_are_anchored_on_c2q2() {
    let t = twin("C2q2");
    let g = PanelGraph::build(&t, Sign::Plus).unwrap();
    let table = t.building().table().clone();
    let panels = g.vertices().to_vec();
    let mut eligible = 0;
    for p in &panels {
        for q in &panels {
            let Ok(d) = t.panel_delta(p, q) else { continue };
            let paths = g.enumerate_compatible_paths(p, q, t.diameter()).unwrap();
            for c in t.building().chambers() {
                let cm = TwinChamber::minus(c);
                let pq = t.proj(cm, q);
                if table.length(d) + 1 != t.codist_len(cm, TwinChamber::plus(pq)) {
                    continue;
                }
                for s in 0..t.rank() {
                    let anchor = t.panel(Sign::Minus, s, c);
                    if !t.residues_opposite(&anchor, p) {
                        continue;
                    }
                    eligible += 1;
                    for path in &paths {
                        let mut anchored = path.clone();
                        anchored.anchor = Some(anchor);
                        let v = check_compatible(&t, &anchored);
                        assert!(v.is_empty(), "{p} {q} {cm} s{s}: {v:?}");
                    }
                }
            }
        }
    }
    assert!(eligible > 100, "{eligible}");
}

#[test]
fn a3q2_compatible_path_iff_parallel_on_random_pairs() {
    let t = twin("A3q2");
    let g = PanelGraph::build(&t, Sign::Plus).unwrap();
    let panels = g.vertices().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let mut parallel = 0;
    for _ in 0..1000 {
        let p = panels[rng.gen_range(0..panels.len())];
        let q = panels[rng.gen_range(0..panels.len())];
        let found = g.find_compatible_path(&p, &q).unwrap();
        assert_eq!(found.is_some(), t.are_parallel(&p, &q), "{p} {q}");
        if let Some(path) = found {
            parallel += 1;
            let rep = verify_path_properties(&t, &path);
            assert!(rep.passed(), "{:?}", rep.violations);
        }
    }
    assert!(parallel > 0);
}

#[test]
fn a3q2_type_transport_between_pairs_with_equal_distance() {
    let t = twin("A3q2");
    let g = PanelGraph::build(&t, Sign::Plus).unwrap();
    let panels = g.vertices().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pairs = Vec::new();
    while pairs.len() < 60 {
        let p = panels[rng.gen_range(0..panels.len())];
        let q = panels[rng.gen_range(0..panels.len())];
        if let Ok(d) = t.panel_delta(&p, &q) {
            pairs.push((p, q, d));
        }
    }
    let mut compared = 0;
    for (i, (p, q, d)) in pairs.iter().enumerate() {
        for (p2, q2, d2) in &pairs[i + 1..] {
            if d != d2 || p.j != p2.j || q.j != q2.j {
                continue;
            }
            compared += 1;
            let a = type_sequences(&g, p, q, t.diameter());
            let b = type_sequences(&g, p2, q2, t.diameter());
            assert_eq!(a, b, "{p} {q} vs {p2} {q2}");
        }
    }
    assert!(compared > 0);
}

#[test]
fn c2q2_wall_graph_has_eight_vertices_and_is_recorded() {
    let t = twin("C2q2");
    let g = PanelGraph::build(&t, Sign::Minus).unwrap();
    for c in [0, 17, 44] {
        for s in 0..2 {
            let wg = wall_graph(&g, TwinChamber::plus(c), s, default_bound(&t)).unwrap();
            assert_eq!(wg.vertices.len(), 8);
            assert!(wg.exhaustive);
        }
    }
    let rep = is_wall_connected(
        &t,
        &WallOptions {
            all: true,
            ..WallOptions::default()
        },
    )
    .unwrap();
    assert_eq!(rep.pairs.len(), 2 * 45 * 2);
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn a3q2_is_wall_connected() {
    let t = twin("A3q2");
    let rep = is_wall_connected(&t, &WallOptions::default()).unwrap();
    assert!(rep.transversal);
    assert_eq!(rep.pairs.len(), 2 * 3);
    for pair in &rep.pairs {
        assert!(
            pair.certificate_violations.is_empty(),
            "{:?}",
            pair.certificate_violations
        );
        assert_eq!(pair.vertices, 32);
    }
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn small_bound_gives_no_negative_verdict() {
    let t = twin("A3q2");
    let rep = is_wall_connected(
        &t,
        &WallOptions {
            bound: Some(0),
            ..WallOptions::default()
        },
    )
    .unwrap();
    assert!(rep.pairs.iter().all(|p| !p.exhaustive && p.edges == 0));
    assert_eq!(rep.verdict, Verdict::Inconclusive);
}

#[test]
fn c3q2_is_wall_connected() {
    let t = twin("C3q2");
    let rep = is_wall_connected(&t, &WallOptions::default()).unwrap();
    assert_eq!(rep.pairs.len(), 2 * 3);
    for pair in &rep.pairs {
        assert!(
            pair.certificate_violations.is_empty(),
            "{:?}",
            pair.certificate_violations
        );
        assert_eq!(pair.vertices, 256);
    }
    assert_eq!(rep.verdict, Verdict::Pass);
}
