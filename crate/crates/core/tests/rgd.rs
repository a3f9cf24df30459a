use std::sync::Arc;

use twinbuild::paths::{is_wall_connected, WallOptions};
use twinbuild::rgd::{closure, RgdFamily, FAMILY_NAMES};
use twinbuild::twin::{Sign, TwinBuilding, TwinChamber};
use twinbuild::zoo;

#[test]
fn builtin_families_satisfy_the_axioms() {
    for (name, order) in [("SL3F2", 168), ("SL3F3", 5616), ("Sp4F2", 720)] {
        let f = RgdFamily::builtin(name).unwrap();
        let rep = f.validate().unwrap();
        for c in &rep.checks {
            assert!(c.passed, "{name} {}: {}", c.axiom, c.detail);
        }
        assert_eq!(f.group().len(), order, "{name}");
        assert_eq!(f.classical_order(), order as u64);
    }
}

#[test]
fn commutators_project_onto_the_intermediate_root_groups() {
    for name in FAMILY_NAMES {
        let f = RgdFamily::builtin(name).unwrap();
        let circle = f.circle().unwrap();
        let two_n = circle.len();
        let n = two_n / 2;
        for i in 1..=two_n {
            for k in i + 1..=i + n - 2 {
                let proj = f.commutator_projection(i, k).unwrap();
                let uk = f.subgroup(circle[(k - 1) % two_n]);
                assert_eq!(proj.as_slice(), uk, "{name} i = {i} k = {k}");
                assert_eq!(closure(&proj, f.dim, f.q), proj);
            }
        }
    }
}

#[test]
fn wc_generation_is_degenerate_for_finite_types() {
    for (name, order) in [("SL3F2", 8), ("SL3F3", 27), ("Sp4F2", 16)] {
        let f = RgdFamily::builtin(name).unwrap();
        for s in 0..2 {
            for side in Sign::both() {
                let rep = f.check_wc_generation(s, side).unwrap();
                assert!(rep.equal && rep.degenerate);
                assert_eq!(rep.full_order, order, "{name}");
            }
        }
    }
}

#[test]
fn wc_agrees_with_wall_graph_connectivity() {
    for name in ["SL3F2", "Sp4F2"] {
        let f = RgdFamily::builtin(name).unwrap();
        let t =
            TwinBuilding::self_twin(Arc::new(zoo::build(&f.building).unwrap().building)).unwrap();
        for s in 0..2 {
            for side in Sign::both() {
                let wc = f.check_wc_generation(s, side).unwrap();
                let c = TwinChamber { sign: side, id: 0 };
                let rep = is_wall_connected(
                    &t,
                    &WallOptions {
                        only_chamber: Some(c),
                        only_gen: Some(s),
                        ..WallOptions::default()
                    },
                )
                .unwrap();
                assert_eq!(rep.pairs.len(), 1);
                assert_eq!(wc.equal, rep.pairs[0].connected, "{name} s{} {side}", s + 1);
            }
        }
    }
}

#[test]
fn unipotent_groups_act_simply_transitively_on_opposite_chambers() {
    for (name, order) in [("SL3F2", 8), ("SL3F3", 27), ("Sp4F2", 16)] {
        let f = RgdFamily::builtin(name).unwrap();
        let fb = zoo::build(&f.building).unwrap();
        for side in Sign::both() {
            let rep = f.simply_transitive_check(&fb, side).unwrap();
            assert!(rep.passed(), "{name} {rep:?}");
            assert_eq!(rep.group_order, order);
        }
    }
}

#[test]
fn mislabelled_root_groups_are_rejected() {
    let text = include_str!("../fixtures/rgd/sl3f2.txt")
        .replacen("root 1 0", "root 9 9", 1)
        .replacen("root 1 1", "root 1 0", 1)
        .replacen("root 9 9", "root 1 1", 1);
    let f = RgdFamily::parse(&text).unwrap();
    let rep = f.validate().unwrap();
    assert!(!rep.passed());
    assert!(
        f.commutator_projection(1, 2).is_err()
            || f.commutator_projection(1, 2).unwrap() != f.subgroup(f.circle().unwrap()[1])
    );
}
