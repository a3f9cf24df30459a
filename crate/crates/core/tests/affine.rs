use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twinbuild::affine::{
    enumerate_positive_roots, generate_certificate, mutate, roots_from_ball, verify_certificate,
    WcCertificate, AFFINE_TYPES, DEFAULT_DEPTH,
};
use twinbuild::CoxeterSystem;

#[test]
fn root_enumeration_matches_the_ball_oracle() {
    for name in AFFINE_TYPES {
        let sys = CoxeterSystem::named(name).unwrap();
        let mut prev: BTreeSet<Vec<i64>> = BTreeSet::new();
        for d in 1..=10 {
            let got: BTreeSet<Vec<i64>> = enumerate_positive_roots(&sys, d)
                .unwrap()
                .iter()
                .map(|r| r.root.coords().to_vec())
                .collect();
            assert_eq!(got, roots_from_ball(&sys, d), "{name} depth {d}");
            assert!(prev.is_subset(&got));
            prev = got;
        }
    }
}

#[test]
fn a2_depth_two_adds_the_roots_one_step_up() {
    let sys = CoxeterSystem::named("~A2").unwrap();
    let roots = enumerate_positive_roots(&sys, 2).unwrap();
    let coords: Vec<Vec<i64>> = roots
        .iter()
        .filter(|r| r.depth == 2)
        .map(|r| r.root.coords().to_vec())
        .collect();
    assert_eq!(coords, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
}

fn certificates(depth: usize) -> Vec<WcCertificate> {
    let mut out = Vec::new();
    for name in AFFINE_TYPES {
        for s in 0..3 {
            let o = generate_certificate(name, s, depth).unwrap();
            assert!(o.failures.is_empty(), "{name} s{}: {:?}", s + 1, o.failures);
            out.push(o.certificate);
        }
    }
    out
}

#[test]
fn certificates_at_default_depth_verify() {
    let mut gonalities = BTreeSet::new();
    for cert in certificates(DEFAULT_DEPTH) {
        assert!(!cert.entries.is_empty());
        let rep = verify_certificate(&cert);
        assert!(
            rep.accepted,
            "{} s{}: {:?}",
            cert.affine_type,
            cert.s + 1,
            &rep.problems[..rep.problems.len().min(5)]
        );
        for e in &cert.entries {
            gonalities.insert((cert.affine_type.clone(), e.fan.len()));
        }
    }
    assert!(gonalities.contains(&("~A2".to_string(), 3)));
    assert!(gonalities.contains(&("~C2".to_string(), 4)));
    assert!(gonalities.contains(&("~G2".to_string(), 6)));
}

#[test]
fn mutated_certificates_are_rejected() {
    let certs = certificates(8);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..100 {
        let cert = &certs[i % certs.len()];
        let bad = mutate(cert, &mut rng);
        assert_ne!(&bad, cert);
        assert!(!verify_certificate(&bad).accepted, "mutation {i} accepted");
    }
}

#[test]
fn certificates_round_trip_through_json() {
    let cert = generate_certificate("~C2", 1, 6).unwrap().certificate;
    let json = serde_json::to_string(&cert).unwrap();
    assert!(json.starts_with("{\"type\":\"~C2\""));
    let back: WcCertificate = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cert);
}
