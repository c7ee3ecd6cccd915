use std::process::Command;

use proptest::prelude::*;
use qpoly::generate::{haar_random_pure, random_mixed};
use qpoly::SystemLayout;
use qpoly_cli::report::{canonical_json, record_csv, strip_timing, CSV_COLUMNS};
use qpoly_cli::{
    cmd_compute, cmd_fuzz, cmd_verify, statefile, LoadedState, Measure, ReportRecord, RunConfig,
    StateKind,
};

fn qpoly(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qpoly"))
        .args(args)
        .env_remove("QPOLY_JOBS")
        .output()
        .unwrap()
}

fn quick() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.optimizer.restarts = 3;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn state_files_round_trip_exactly(seed in any::<u64>(), d in prop::collection::vec(2usize..=3, 2..=3), mixed in any::<bool>()) {
        let layout = SystemLayout::with_dims(&d).unwrap();
        let state = if mixed {
            LoadedState::Mixed(random_mixed(layout, seed).unwrap())
        } else {
            LoadedState::Pure(haar_random_pure(layout, seed))
        };
        let text = statefile::to_json(&state);
        let back = statefile::from_json(&text).unwrap();
        prop_assert_eq!(&back, &state);
        prop_assert_eq!(statefile::to_json(&back), text);
    }
}

#[test]
fn state_file_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w3.json");
    let w: StateKind = "w,3".parse().unwrap();
    let state = w.build(0).unwrap();
    statefile::save(&path, &state).unwrap();
    let first = std::fs::read(&path).unwrap();
    statefile::save(&path, &statefile::load(&path).unwrap()).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn malformed_state_files() {
    for text in [
        "not json",
        r#"{"dims": [2], "labels": ["A"], "kind": "pure", "data": [[1, 0], [0, 0]]}"#,
        r#"{"dims": [2, 2], "kind": "pure", "data": [[1, 0]]}"#,
        r#"{"dims": [2, 2], "kind": "pure", "data": [[1, 0], [1, 0], [0, 0], [0, 0]]}"#,
        r#"{"dims": [2, 2], "kind": "thermal", "data": []}"#,
        r#"{"dims": [2, 2], "labels": ["A"], "kind": "pure", "data": []}"#,
    ] {
        assert!(statefile::from_json(text).is_err(), "{text}");
    }
    let ok = r#"{"dims": [2, 2], "kind": "pure", "data": [[1, 0], [0, 0], [0, 0], [0, 0]]}"#;
    assert!(matches!(
        statefile::from_json(ok).unwrap(),
        LoadedState::Pure(_)
    ));
}

#[test]
fn compute_examples() {
    let ghz = StateKind::Ghz(3).build(0).unwrap();
    let keep = vec!["A".to_string(), "B".to_string()];
    let r = cmd_compute(&ghz, "ghz,3", Measure::Eoa, Some(&keep), None, &quick()).unwrap();
    assert!((r.checks[0].lhs - 1.0).abs() < 1e-4);

    let w = StateKind::W(3).build(0).unwrap();
    let r = cmd_compute(
        &w,
        "w,3",
        Measure::Entropy,
        Some(&["A".to_string()]),
        None,
        &quick(),
    )
    .unwrap();
    assert!((r.checks[0].lhs - 0.9183).abs() < 1e-4);

    let p = StateKind::Product(3).build(0).unwrap();
    let r = cmd_compute(&p, "product,3", Measure::Discord, None, None, &quick()).unwrap();
    assert!(r.checks[0].lhs.abs() < 1e-9);
}

#[test]
fn report_json_round_trips() {
    let psi = StateKind::RandomPure {
        dims: vec![2, 2, 2],
        seed: Some(5),
    }
    .build(0)
    .unwrap();
    let rec = cmd_verify(&psi, "random-pure,2x2x2,5", "A", &quick()).unwrap();
    let text = canonical_json(&rec);
    let back: ReportRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rec);
    assert_eq!(canonical_json(&back), text);
}

#[test]
fn csv_has_one_row_per_check() {
    let ghz = StateKind::Ghz(3).build(0).unwrap();
    let rec = cmd_verify(&ghz, "ghz,3", "A", &quick()).unwrap();
    let text = record_csv(&rec).unwrap();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        CSV_COLUMNS
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), rec.checks.len());
    assert!(rows.iter().all(|r| &r[7] == "PASS"));
}

#[test]
fn one_fuzz_trial_is_a_verify() {
    let cfg = quick();
    let fuzz = cmd_fuzz(&[2, 2, 2], 1, 9, "A", &cfg).unwrap();
    let psi = StateKind::RandomPure {
        dims: vec![2, 2, 2],
        seed: Some(9),
    }
    .build(9)
    .unwrap();
    let verify = cmd_verify(&psi, "random-pure,2x2x2,9", "A", &cfg).unwrap();
    let strip = |r: &ReportRecord| {
        let mut v = serde_json::to_value(r).unwrap();
        strip_timing(&mut v);
        v
    };
    assert_eq!(strip(&fuzz.records[0]), strip(&verify));
    assert_eq!(fuzz.summary.trials, 1);
}

#[test]
fn fuzz_records_are_in_trial_order() {
    let mut cfg = quick();
    cfg.identities = false;
    let rep = cmd_fuzz(&[2, 2, 2], 4, 30, "A", &cfg).unwrap();
    let states: Vec<&str> = rep.records.iter().map(|r| r.state.as_str()).collect();
    assert_eq!(
        states,
        [
            "random-pure,2x2x2,30",
            "random-pure,2x2x2,31",
            "random-pure,2x2x2,32",
            "random-pure,2x2x2,33"
        ]
    );
    assert_eq!(rep.summary.fail, 0);
    assert!(cmd_fuzz(&[2, 2, 2], 0, 30, "A", &cfg).is_err());
}

#[test]
fn mixed_verify_needs_opt_in() {
    let rho = StateKind::RandomMixed {
        dims: vec![2, 2, 2],
        seed: Some(1),
    }
    .build(0)
    .unwrap();
    assert!(cmd_verify(&rho, "random-mixed,2x2x2,1", "A", &quick()).is_err());
    let cfg = RunConfig {
        allow_mixed: true,
        ..quick()
    };
    let rec = cmd_verify(&rho, "random-mixed,2x2x2,1", "A", &cfg).unwrap();
    assert!(rec
        .checks
        .iter()
        .all(|c| c.verdict != Some(qpoly::Verdict::Fail)));
}

#[test]
fn exit_codes() {
    let ok = qpoly(&[
        "compute",
        "--gen",
        "w,3",
        "--keep",
        "A",
        "--measure",
        "entropy",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!((v["checks"][0]["lhs"].as_f64().unwrap() - 0.9183).abs() < 1e-4);

    let pass = qpoly(&[
        "verify",
        "--gen",
        "ghz,3",
        "--restarts",
        "2",
        "--identities",
        "off",
    ]);
    assert_eq!(pass.status.code(), Some(0));

    assert_eq!(qpoly(&["verify", "--gen", "nope,3"]).status.code(), Some(2));
    assert_eq!(
        qpoly(&["verify", "--gen", "random-mixed,2x2x2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qpoly(&[
            "compute",
            "--gen",
            "bell",
            "--measure",
            "eof",
            "--restarts",
            "0"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        qpoly(&[
            "compute",
            "--gen",
            "bell",
            "--measure",
            "eof",
            "--keep",
            "Q"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(qpoly(&["verify"]).status.code(), Some(2));
    assert_eq!(
        qpoly(&["verify", "--state", "/nonexistent/state.json"])
            .status
            .code(),
        Some(3)
    );
    let dir = tempfile::tempdir().unwrap();
    let blocked = dir.path().join("missing-dir").join("out.json");
    let code = qpoly(&[
        "compute",
        "--gen",
        "bell",
        "--measure",
        "entropy",
        "--out",
        blocked.to_str().unwrap(),
    ])
    .status
    .code();
    assert_eq!(code, Some(3));
}

#[test]
fn binary_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = qpoly(&[
            "verify",
            "--gen",
            "random-pure,2x2x2",
            "--seed",
            "7",
            "--restarts",
            "3",
            "--jobs",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        strip_timing(&mut v);
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn state_file_drives_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ghz.json");
    let out = qpoly(&["export", "--gen", "ghz,3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = qpoly(&[
        "compute",
        "--state",
        path.to_str().unwrap(),
        "--keep",
        "A,B",
        "--measure",
        "eoa",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    let value: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 1.0).abs() < 1e-4);
}
