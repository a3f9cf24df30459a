use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twinbuild"))
        .args(args)
        .env("TWINBUILD_FIXTURES", fixtures())
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("twinbuild-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn opposition_connectivity_sets_the_exit_code() {
    assert_eq!(code(&["opp", "check", "C2q2", "--k", "0"]), 1);
    assert_eq!(code(&["opp", "check", "C2q2", "--k", "1"]), 0);
    assert_eq!(code(&["opp", "check", "A2q2", "--k", "0"]), 0);
}

#[test]
fn usage_and_domain_errors_exit_two() {
    assert_eq!(code(&["zoo", "show", "B7q5"]), 2);
    assert_eq!(code(&["walls", "check", "C2q2", "--gen", "3"]), 2);
    assert_eq!(
        code(&["opp", "check", "C2q2", "--k", "1", "--chamber", "45"]),
        2
    );
    assert_eq!(code(&["affine", "cert", "~B2"]), 2);
    assert_eq!(code(&["rgd", "check", "SL9F7"]), 2);
    assert_eq!(code(&["walls", "check", "C2q2", "--dot", "x.dot"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn fixture_errors_exit_three() {
    let out = run(&["zoo", "ingest", "geometry/fano_broken.inc"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-constant order"));
    assert_eq!(code(&["zoo", "ingest", "geometry/missing.inc"]), 3);
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&["affine", "verify", bad.to_str().unwrap()]), 3);
}

#[test]
fn ingested_geometries_pass_the_axioms() {
    assert_eq!(code(&["zoo", "ingest", "geometry/fano.inc"]), 0);
    assert_eq!(code(&["zoo", "ingest", "geometry/w2.inc"]), 0);
    assert_eq!(code(&["axioms", "check", "geometry/w2.inc", "--twin"]), 0);
}

#[test]
fn json_reports_are_deterministic() {
    for args in [
        vec!["opp", "check", "C2q2", "--k", "0"],
        vec!["walls", "check", "A2q3"],
        vec!["axioms", "check", "C3q2", "--samples", "500"],
        vec!["rgd", "check", "SL3F2"],
    ] {
        let (a, b) = (tmp("a.json"), tmp("b.json"));
        let mut first = args.clone();
        first.extend(["--json", a.to_str().unwrap()]);
        let mut second = args.clone();
        second.extend(["--json", b.to_str().unwrap()]);
        run(&first);
        run(&second);
        let (ja, jb) = (
            std::fs::read_to_string(&a).unwrap(),
            std::fs::read_to_string(&b).unwrap(),
        );
        let strip = |s: &str| {
            s.replace(a.to_str().unwrap(), "")
                .replace(b.to_str().unwrap(), "")
        };
        assert_eq!(strip(&ja), strip(&jb), "{args:?}");
        let v: serde_json::Value = serde_json::from_str(&ja).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert!(!ja.contains("elapsed"));
    }
}

#[test]
fn json_records_failing_checks() {
    let path = tmp("opp0.json");
    run(&[
        "opp",
        "check",
        "C2q2",
        "--k",
        "0",
        "--json",
        path.to_str().unwrap(),
    ]);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
    let comps = v["checks"][0]["detail"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert!(comps.iter().all(|c| c.as_array().unwrap().len() == 8));
}

#[test]
fn dot_output_is_written() {
    let opp = tmp("opp.dot");
    assert_eq!(
        code(&[
            "opp",
            "check",
            "C2q2",
            "--k",
            "0",
            "--dot",
            opp.to_str().unwrap()
        ]),
        1
    );
    let text = std::fs::read_to_string(&opp).unwrap();
    assert!(text.starts_with("graph ") && text.ends_with("}\n"));

    let wall = tmp("wall.dot");
    let args = [
        "walls",
        "check",
        "C2q2",
        "--chamber",
        "0",
        "--gen",
        "1",
        "--dot",
        wall.to_str().unwrap(),
    ];
    assert_eq!(code(&args), 0);
    let text = std::fs::read_to_string(&wall).unwrap();
    assert_eq!(text.matches(" -- ").count(), 28);

    let empty = tmp("empty.dot");
    let args = [
        "walls",
        "check",
        "C2q2",
        "--chamber",
        "0",
        "--gen",
        "1",
        "--bound",
        "0",
        "--dot",
        empty.to_str().unwrap(),
    ];
    assert_eq!(code(&args), 1);
    let text = std::fs::read_to_string(&empty).unwrap();
    assert!(text.starts_with("graph ") && text.ends_with("}\n"));
    assert_eq!(text.matches(" -- ").count(), 0);
}

#[test]
fn wall_check_reports_inconclusive_bounds() {
    let out = run(&["walls", "check", "C2q2", "--bound", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("no edge found (bound 0)"));
}

#[test]
fn isometry_extension_and_rigidity() {
    let out = tmp("ext.map");
    let args = [
        "isom",
        "extend",
        "C2q2",
        "--map",
        "isometry/c2q2_identity.map",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(code(&args), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 90);
    assert!(text.lines().all(|l| {
        let (a, b) = l.split_once(' ').unwrap();
        a == b
    }));
    assert_eq!(code(&["isom", "rigidity", "C2q2", "--chamber", "3"]), 0);
}

#[test]
fn affine_certificates_round_trip() {
    let path = tmp("c2.json");
    assert_eq!(
        code(&[
            "affine",
            "cert",
            "~C2",
            "--depth",
            "10",
            "--out",
            path.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(code(&["affine", "verify", path.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let ell = &mut v[0]["entries"][0]["ell"];
    *ell = serde_json::json!(ell.as_u64().unwrap() + 1);
    std::fs::write(&path, v.to_string()).unwrap();
    assert_eq!(code(&["affine", "verify", path.to_str().unwrap()]), 1);
}
